//! Parsing, formatting and satisfaction checks for access policies.

use std::collections::BTreeSet;

use piratte::policy::{format_policy, parse_policy, select_satisfying_leaves};

fn main() {
    let held: BTreeSet<String> = ["nurse", "ward_3"].into_iter().map(String::from).collect();
    for text in [
        "nurse and ward_3",
        "Doctor or (Nurse AND ward_3)",
        "2 of (nurse, doctor, ward_3, night_shift)",
        "doctor and (nurse",
        "3 of (nurse, ward_3)",
        "nurse or ward-3",
    ] {
        match parse_policy(text) {
            Ok(tree) => {
                let selection = select_satisfying_leaves(&tree, &held);
                println!(
                    "{text:<44} => {:<48} leaves={} satisfied={} uses={:?}",
                    format_policy(&tree),
                    tree.leaf_count(),
                    tree.is_satisfied_by(&held),
                    selection.map(|s| s.leaves().to_vec())
                );
            }
            Err(e) => println!("{text:<44} => error: {e}"),
        }
    }
}
