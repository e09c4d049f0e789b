//! Parse boolean query expressions and minimize them before execution.
//!
//! `cargo run --example query_minimize`

use probe_core::query::{minimize_tree, parse_query, CompiledQuery};

fn show(label: &str, c: &CompiledQuery) {
    let occ: Vec<String> = c
        .atomics
        .iter()
        .zip(&c.occurrences)
        .map(|(a, o)| format!("{a}×{o}"))
        .collect();
    println!("  {label:<10} {}   leaves={} [{}]", c.tree, c.leaf_count(), occ.join(", "));
}

fn main() -> probe_core::Result<()> {
    let atomics = ["Q1", "Q2", "Q3", "Q4"];
    for text in [
        "(Q1 OR Q2) AND (Q1 OR Q3)",
        "Q1 AND Q2 OR Q1 AND Q3",
        "Q1 OR Q1 AND Q2",
        "(Q1 AND Q2) OR (Q1 AND Q2 AND Q3) OR Q4",
        "Q1 AND (Q2 OR Q3) AND (Q2 OR Q4)",
    ] {
        let tree = parse_query(text, &atomics)?;
        println!("{text}");
        show("as written", &CompiledQuery::from_tree(tree.clone()));
        show("minimized", &minimize_tree(&tree)?);
    }

    // Unknown atomics and syntax errors carry a position.
    for bad in ["Q1 AND Q9", "Q1 AND (Q2 OR"] {
        match parse_query(bad, &atomics) {
            Ok(t) => println!("unexpected parse: {t}"),
            Err(e) => println!("{bad:<16} -> {e}"),
        }
    }
    Ok(())
}
