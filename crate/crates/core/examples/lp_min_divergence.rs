//! Minimum-divergence decoding through one linear program per joint type,
//! compared with the exhaustive decoder.

use hashprop::ensemble::generate_sparse;
use hashprop::lp_md::{md_via_lp, MdLpOptions, TypeStatus};
use hashprop::slepian_wolf::{dsbs, sw_decode_md, SwCode};

fn main() -> hashprop::Result<()> {
    let n = 6;
    let a = generate_sparse(2, 4, n, 2, 21)?;
    let b = generate_sparse(2, 4, n, 2, 22)?;
    let law = dsbs(0.1)?;
    let x = vec![0, 1, 1, 0, 1, 0];
    let y = vec![0, 1, 1, 0, 0, 0];
    let syndromes = vec![a.apply(&x), b.apply(&y)];

    let plain = md_via_lp(&[a.clone(), b.clone()], &syndromes, &law, MdLpOptions::default())?;
    let count = |s: TypeStatus| plain.types.iter().filter(|t| t.status == s).count();
    println!(
        "{} types: {} infeasible, {} integral, {} fractional",
        plain.types.len(),
        count(TypeStatus::Infeasible),
        count(TypeStatus::Integral),
        count(TypeStatus::Fractional)
    );
    println!("LP only: {:?} at D = {:.4}", plain.best, plain.divergence);

    let options = MdLpOptions { fallback_cap: Some(1 << 16), ..MdLpOptions::default() };
    let full = md_via_lp(&[a.clone(), b.clone()], &syndromes, &law, options)?;
    println!("with fallback: {:?} at D = {:.4}", full.best, full.divergence);

    let code = SwCode::new(vec![a, b], law)?;
    println!("exhaustive: {:?}", sw_decode_md(&code, &syndromes)?.tuple());
    Ok(())
}
