//! Two-receiver broadcast over binary symmetric branches with correlated
//! auxiliaries: region, parameter choice, code search, error.

use hashprop::broadcast::{
    bc_code_search, bc_error_mc, bc_feasible_params, bc_rate_region, BcDecoder, BcProblem, SearchConfig, SymbolMap,
};
use hashprop::ensemble::Family;
use hashprop::types::{CondDistribution, Distribution};

fn main() -> hashprop::Result<()> {
    // X = (U, V); receiver 1 sees U, receiver 2 sees V, each through a BSC
    let (p1, p2) = (0.02, 0.05);
    let mut table = vec![0.0; 16];
    for x in 0..4 {
        for y in 0..4 {
            let a = if y / 2 == x / 2 { 1.0 - p1 } else { p1 };
            let b = if y % 2 == x % 2 { 1.0 - p2 } else { p2 };
            table[x * 4 + y] = a * b;
        }
    }
    let channel = CondDistribution::new(vec![2, 2], vec![4], table)?;
    let aux = Distribution::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4])?;
    let p = BcProblem::new(channel, aux, SymbolMap::Deterministic(vec![0, 1, 2, 3]))?;

    let rates = [0.25, 0.25];
    let region = bc_rate_region(&p, &rates)?;
    println!("R = {rates:?} inside the region: {}", region.inside);
    for c in &region.constraints {
        println!("  J = {:?}: {:.3} < {:.3}", c.subset, c.rate_sum, c.bound);
    }

    let Some(params) = bc_feasible_params(&p, &rates)? else {
        println!("no admissible (r, eps) for these rates");
        return Ok(());
    };
    println!("r = {:?}, eps = {:.4}", params.shared_rates, params.epsilon);

    let config = SearchConfig { family: Family::Uniform, q: 2, n: 8, tries: 16, seed: 3, decoder: BcDecoder::Ml };
    let found = bc_code_search(&p, &params, &config)?;
    println!(
        "best of {} tries: exact error {:.4} (try {}), realized r {:?}, R {:?}",
        config.tries, found.error, found.try_index, found.realized_shared, found.realized_message
    );
    let mc = bc_error_mc(&found.code, &p, BcDecoder::Ml, 20_000, 9)?;
    println!("Monte Carlo {:.4} [{:.4}, {:.4}]", mc.estimate, mc.ci_lo, mc.ci_hi);
    Ok(())
}
