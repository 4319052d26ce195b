use std::path::PathBuf;

use sentivol_core::sentiment::load_external_scores;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn scorer_output_loads_bit_exactly() {
    let series = load_external_scores(&fixture("sentiment_external.csv")).unwrap();
    let bits: Vec<u64> = std::fs::read_to_string(fixture("sentiment_external.bits"))
        .unwrap()
        .lines()
        .map(|l| u64::from_str_radix(l.trim(), 16).unwrap())
        .collect();
    assert_eq!(series.len(), bits.len());
    for (v, b) in series.values.iter().zip(&bits) {
        assert_eq!(v.to_bits(), *b, "{v}");
    }
    assert_eq!(series.label, "external:dictionary-sample");
    assert!(series.values.iter().all(|v| (-1.0..=1.0).contains(v)));
    assert!(series.dates.windows(2).all(|w| w[0] < w[1]));
}
