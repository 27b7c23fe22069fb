#![no_main]
use fairalloc::{CompletionSpec, GroupModel, RewardSpec};
use libfuzzer_sys::fuzz_target;

// Input: `<completion json>\n<reward json>\n<deadline>`.
fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let mut parts = text.splitn(3, '\n');
    let (Some(c), Some(r), Some(t)) = (parts.next(), parts.next(), parts.next()) else {
        return;
    };
    let (Ok(c), Ok(r)) = (
        serde_json::from_str::<CompletionSpec>(c),
        serde_json::from_str::<RewardSpec>(r),
    ) else {
        return;
    };
    let Ok(t) = t.trim().parse::<f64>() else { return };
    let Ok(group) = GroupModel::new("fuzz", c, r) else {
        return;
    };
    if let (Ok(mu), Ok(theta)) = (group.truncated_mean_time(t), group.expected_reward(t)) {
        assert!(mu >= 0.0 && theta >= 0.0, "mu {mu} theta {theta}");
    }
});
