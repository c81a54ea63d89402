//! (alpha, beta) of small ensembles from their kernel spectra, and an
//! exhaustive check of the strong hash inequality.

use hashprop::ensemble::{alpha_beta_from_spectrum, verify_strong_hash, Ensemble, EnsembleProfile, TypeFilter};

fn main() -> hashprop::Result<()> {
    let cases = [
        ("uniform (2,2,3)", Ensemble::uniform(2, 2, 3)?),
        ("sparse (2,2,3), tau 2", Ensemble::sparse(2, 2, 3, 2)?),
        ("sparse (3,1,3), tau 2", Ensemble::sparse(3, 1, 3, 2)?),
        ("binning (2,1,3)", Ensemble::binning(2, 1, 3)?),
    ];
    for (name, ens) in cases {
        let e = ens.enumerate(1 << 22)?;
        let profile = if ens.is_linear() {
            alpha_beta_from_spectrum(&e, &TypeFilter::default_for(ens.n()))?
        } else {
            EnsembleProfile::universal(e.image_size())
        };
        let report = verify_strong_hash(&e, &profile)?;
        println!(
            "{name:<24} support {:>4}  |Im| {:>3}  alpha {:.4}  beta {:.4}  holds {}  max excess {:.4}",
            e.support.len(),
            profile.image_size,
            profile.alpha,
            profile.beta,
            report.holds,
            report.max_lhs
        );
    }
    Ok(())
}
