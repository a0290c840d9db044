use std::path::Path;

use visil::prompts;

#[test]
fn assets_match_golden_files() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (name, text) in prompts::ALL {
        let golden = std::fs::read_to_string(dir.join(format!("{name}.txt"))).unwrap();
        assert_eq!(golden, text, "{name}");
    }
    let count = std::fs::read_dir(&dir).unwrap().count();
    assert_eq!(count, prompts::ALL.len());
}

#[test]
fn keyword_prompt_carries_example_and_exclusion() {
    assert!(prompts::KEYWORDS.contains(r#"["dog", "jump", "frisbee", "park"]"#));
    assert!(prompts::KEYWORDS.contains(r#"Exclude the word "video" as a keyword."#));
    assert!(prompts::VISIL.contains("[MASK]"));
}
