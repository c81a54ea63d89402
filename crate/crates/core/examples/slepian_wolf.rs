//! Syndrome coding of a doubly symmetric binary source: region check, one
//! encode/decode round trip, exact and Monte Carlo error.

use hashprop::ensemble::generate_sparse;
use hashprop::slepian_wolf::{dsbs, sw_decode_md, sw_encode, sw_error_exact, sw_error_mc, sw_rate_check, SwCode, SwDecoder, DEFAULT_SEARCH_CAP};

fn main() -> hashprop::Result<()> {
    let law = dsbs(0.05)?;
    let n = 8;
    let code = SwCode::new(vec![generate_sparse(2, 7, n, 4, 11)?, generate_sparse(2, 7, n, 4, 12)?], law.clone())?;
    let rates = code.rates();
    let check = sw_rate_check(&rates, &law)?;
    println!("rates {rates:?}, inside the region: {}", check.inside);
    for c in &check.constraints {
        println!("  J = {:?}: {:.3} > {:.3}", c.subset, c.rate_sum, c.bound);
    }

    let x = vec![vec![1, 0, 1, 1, 0, 0, 1, 0], vec![1, 0, 1, 1, 0, 1, 1, 0]];
    let syndromes = sw_encode(&code, &x)?;
    let decoded = sw_decode_md(&code, &syndromes)?;
    println!("sent {x:?}\ndecoded {:?}", decoded.tuple());

    let exact = sw_error_exact(&code, SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP)?;
    let mc = sw_error_mc(&code, SwDecoder::MinDivergence, 20_000, 5)?;
    println!("exact error {exact:.4}; Monte Carlo {:.4} [{:.4}, {:.4}]", mc.estimate, mc.ci_lo, mc.ci_hi);
    Ok(())
}
