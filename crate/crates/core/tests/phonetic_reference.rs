use convokernel::phonetic::phonetic_encode;

const REFERENCE: &str = include_str!("fixtures/double_metaphone_reference.tsv");

fn reference_rows() -> Vec<(&'static str, &'static str, &'static str)> {
    REFERENCE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut cols = l.split('\t');
            let word = cols.next().unwrap();
            let primary = cols.next().unwrap_or("");
            let secondary = cols.next().unwrap_or("");
            (word, primary, secondary)
        })
        .collect()
}

#[test]
fn fixture_has_500_words() {
    assert_eq!(reference_rows().len(), 500);
}

#[test]
fn primary_codes_match_reference() {
    let mismatches: Vec<_> = reference_rows()
        .into_iter()
        .filter_map(|(word, primary, _)| {
            let got = phonetic_encode(word);
            (got.primary != primary).then(|| format!("{word}: expected {primary}, got {}", got.primary))
        })
        .collect();
    assert!(mismatches.is_empty(), "{} mismatches:\n{}", mismatches.len(), mismatches.join("\n"));
}

#[test]
fn secondary_codes_match_reference() {
    // a blank alternate in the fixture means "same as primary"
    let mismatches: Vec<_> = reference_rows()
        .into_iter()
        .filter_map(|(word, primary, secondary)| {
            let expected = if secondary.is_empty() { primary } else { secondary };
            let got = phonetic_encode(word);
            (got.secondary != expected).then(|| format!("{word}: expected {expected}, got {}", got.secondary))
        })
        .collect();
    assert!(mismatches.is_empty(), "{} mismatches:\n{}", mismatches.len(), mismatches.join("\n"));
}
