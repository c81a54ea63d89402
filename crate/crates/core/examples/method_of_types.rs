//! Joint types, divergences, typicality and the slack functions.

use hashprop::types::{
    divergence, entropy, joint_type, slack_functions, verify_typicality_bounds, Distribution, SlackFn, TypicalityLemma,
    TypicalityParams,
};

fn main() -> hashprop::Result<()> {
    let u = [0, 1, 0, 0, 1, 0, 1, 0];
    let v = [0, 0, 1, 0, 1, 0, 0, 1];
    let t = joint_type(&[&u, &v], &[2, 2])?;
    println!("t_uv = {:?} (n = {})", t.counts(), t.n());

    let mu = Distribution::new(vec![2, 2], vec![0.4, 0.1, 0.15, 0.35])?;
    let nu = t.empirical();
    println!("H(mu) = {:.4} bits, D(nu || mu) = {:.4} bits", entropy(&mu), divergence(&nu, &mu)?);

    for n in [4, 16, 64, 256] {
        let lam = slack_functions(SlackFn::Lambda, 2, None, n, 0.1, 0.1)?;
        let eta = slack_functions(SlackFn::Eta, 2, None, n, 0.1, 0.1)?;
        println!("n = {n:>3}: lambda_U = {lam:.4}, eta_U(0.1) = {eta:.4}");
    }

    let params = TypicalityParams::new(0.5, 0.5)?;
    for lemma in [TypicalityLemma::Trans, TypicalityLemma::Prob, TypicalityLemma::Number, TypicalityLemma::Aep] {
        let r = verify_typicality_bounds(lemma, &mu, &params, 10, 1 << 20)?;
        println!("{lemma:?} at n = 10, gamma = 0.5: holds = {} (worst part {:.4} vs {:.4})", r.holds, r.lhs, r.rhs);
    }
    Ok(())
}
