//! Split a false-negative budget β across the leaves of a query so the
//! total privacy cost is as small as possible, and compare with an even
//! split and with a numeric Lagrange solve.
//!
//! `cargo run --example budget_apportion`

use probe_core::apportion::{
    alpha_split, beta_split_equal, beta_split_tree, numeric_lagrange_oracle, predicted_epsilon, ApportionInput,
};

fn main() -> probe_core::Result<()> {
    let cases = [
        ("symmetric pair", vec![10.0, 10.0], vec![1.0, 1.0], vec![1, 1]),
        ("wide vs narrow region", vec![30.0, 5.0], vec![1.0, 1.0], vec![1, 1]),
        ("repeated leaf", vec![10.0, 10.0, 10.0], vec![1.0, 1.0, 1.0], vec![2, 1, 1]),
        ("mixed sensitivity", vec![20.0, 8.0, 3.0, 12.0], vec![1.0, 5.0, 1.0, 2.0], vec![1, 1, 2, 1]),
    ];
    let beta = 0.05;
    for (name, u, dg, o) in cases {
        let input = ApportionInput::new(u, dg, o.clone(), beta)?;
        let opt = beta_split_tree(&input)?;
        let eq = beta_split_equal(&input)?;
        let oracle = numeric_lagrange_oracle(&input)?;
        let gap = opt.betas.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{name}");
        println!("  optimal β_i  {:?}", round(&opt.betas));
        println!("  equal β_i    {:?}", round(&eq.betas));
        println!(
            "  predicted ε  optimal {:.4}  equal {:.4}  (oracle gap {gap:.1e})",
            opt.predicted_epsilon,
            predicted_epsilon(&input, &eq.betas)
        );
        println!("  α_i for α=0.1 {:?}", round(&alpha_split(0.1, &o)));
    }
    Ok(())
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e6).round() / 1e6).collect()
}
