//! The kappa schedule for a few beta sequences: polynomial when beta decays
//! fast enough, inverse square root otherwise.

use hashprop::broadcast::{kappa_schedule, DEFAULT_KAPPA_RANGE};

type Beta = fn(f64) -> f64;

fn main() -> hashprop::Result<()> {
    let ns: Vec<usize> = DEFAULT_KAPPA_RANGE.collect();
    let sequences: [(&str, Beta); 3] = [
        ("2^-n", |n| (-n).exp2()),
        ("n^-2", |n| n.powi(-2)),
        ("1/log(n+1)", |n| 1.0 / (n + 1.0).log2()),
    ];
    for (name, f) in sequences {
        let beta: Vec<f64> = ns.iter().map(|&n| f(n as f64).min(1.0)).collect();
        let s = kappa_schedule(&[beta], &ns, 1.0)?;
        println!(
            "beta = {name:<11} branch {:?}: diverges {}, kappa*beta -> 0 {}, sub-exponential {}",
            s.branch, s.diverges, s.kills_beta[0], s.sub_exponential
        );
    }
    Ok(())
}
