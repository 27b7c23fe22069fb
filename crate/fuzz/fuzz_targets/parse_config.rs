#![no_main]
use libfuzzer_sys::fuzz_target;

// A config that parses must also solve or fail cleanly.
fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(cfg) = fairalloc::config::parse_config_str(&text) {
        let _ = cfg.env.offline();
        if let Some(sim) = &cfg.simulate {
            let _ = cfg.build_policy(&sim.policy, sim.budget);
        }
    }
});
