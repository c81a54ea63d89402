//! Coverage of the 95% Wilson interval on a code whose error is known
//! exactly.

use hashprop::ensemble::generate_sparse;
use hashprop::mc::wilson_interval;
use hashprop::slepian_wolf::{dsbs, sw_error_exact, sw_error_mc, SwCode, SwDecoder, DEFAULT_SEARCH_CAP};

fn main() -> hashprop::Result<()> {
    let code = SwCode::new(vec![generate_sparse(2, 5, 6, 4, 1)?, generate_sparse(2, 5, 6, 4, 2)?], dsbs(0.1)?)?;
    let exact = sw_error_exact(&code, SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP)?;
    let reps = 200;
    let covered = (0..reps)
        .filter(|&r| sw_error_mc(&code, SwDecoder::MinDivergence, 5_000, r).map(|e| e.covers(exact)).unwrap_or(false))
        .count();
    println!("exact error {exact:.4}; interval covers it in {covered}/{reps} runs");
    let (lo, hi) = wilson_interval(0, 100, hashprop::mc::Z95);
    println!("zero errors in 100 trials still gives [{lo:.4}, {hi:.4}]");
    Ok(())
}
