use std::path::Path;

use reachset::actionset::{parse_action_set, serialize_action_set, ActionSetSpec};
use reachset::reachable::{get_reachable_set, partition, Limits};

fn load(name: &str) -> ActionSetSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    parse_action_set(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn shipped_specs_parse_and_round_trip() {
    for (name, dim, constraints) in [
        ("reapplicant.txt", 2, 0),
        ("german.txt", 36, 4),
        ("heloc.txt", 43, 20),
        ("givemecredit.txt", 23, 4),
    ] {
        let spec = load(name);
        assert_eq!(spec.dim(), dim, "{name}");
        assert_eq!(spec.constraints().len(), constraints, "{name}");
        let again = parse_action_set(&serialize_action_set(&spec)).unwrap();
        assert_eq!(again, spec, "{name}");
        assert_eq!(again.spec_hash(), spec.spec_hash());
    }
}

#[test]
fn heloc_trade_counts_share_a_block() {
    let spec = load("heloc.txt");
    let p = partition(&spec);
    let idx = |n: &str| spec.feature_index(n).unwrap();
    let block = p.block_of(idx("NumRevolvingTrades>=2"));
    for name in [
        "NumRevolvingTrades>=3",
        "NumRevolvingTrades>=7",
        "NumRevolvingTradesWBalance>=2",
        "NumRevolvingTradesWBalance>=7",
    ] {
        assert_eq!(p.block_of(idx(name)), block, "{name}");
    }
    assert_ne!(p.block_of(idx("NumInstallTrades>=2")), block);
}

#[test]
fn german_linkage_moves_age() {
    let spec = load("german.txt");
    let mut x = vec![0i64; 36];
    x[0] = 30; // Age
    x[5] = 1; // LiablePersons
    x[21] = 2; // LoanRate
    let set = get_reachable_set(&spec, &x, &Limits::default()).unwrap();
    assert!(set.is_complete());
    let yar = spec.feature_index("YearsAtResidence").unwrap();
    for p in set.iter() {
        let emp = spec.feature_index("YearsEmployed>=1").unwrap();
        assert_eq!(p[0] - 30, p[yar] + p[emp]);
    }
    // 8 residence values, 2 employment values, 2 x 2 x 2 other binaries,
    // 3 checking levels and 3 savings levels.
    assert_eq!(set.len(), 8 * 2 * 8 * 3 * 3);
}
