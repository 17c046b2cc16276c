use rand::Rng;
use serde::Serialize;

use super::AnalysisContext;
use crate::error::{Error, Result};
use crate::matroid::FractionalPoint;
use crate::scheme::{CrScheme, SelectBuffers};

/// Empirical drop rate of the distinguished element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropEstimate {
    pub estimate: f64,
    pub trials: u64,
    pub dropped: u64,
    /// `sqrt(p̂ (1 - p̂) / trials)`
    pub std_error: f64,
}

/// Estimates `P[e ∉ π_x(R(x)) | e ∈ R(x)]` by simulation.
///
/// Coordinates are independent, so conditioning on `e ∈ R(x)` amounts to
/// drawing `R_S(x)` and adding `e`; every trial is a conditioned trial.
pub fn g_via_simulation_consistency<R: Rng + ?Sized>(
    ctx: &AnalysisContext,
    x: &FractionalPoint,
    trials: u64,
    rng: &mut R,
) -> Result<DropEstimate> {
    ctx.ground().check_same(x.ground())?;
    let e = ctx.element();
    if x.get(e) == 0.0 {
        return Err(Error::ZeroProbability(e));
    }
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    let scheme = CrScheme::uniform_unchecked(x, ctx.k());
    let coords = x.coords();
    let mut buffers = SelectBuffers::default();
    let mut realized = Vec::with_capacity(x.len());
    let mut kept = Vec::with_capacity(x.len());
    let mut dropped = 0u64;
    for _ in 0..trials {
        realized.clear();
        for (i, &p) in coords.iter().enumerate() {
            if i == e || rng.random::<f64>() < p {
                realized.push(i);
            }
        }
        scheme.select_into(&realized, rng, &mut buffers, &mut kept);
        if kept.binary_search(&e).is_err() {
            dropped += 1;
        }
    }
    let estimate = dropped as f64 / trials as f64;
    Ok(DropEstimate {
        estimate,
        trials,
        dropped,
        std_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::g_value;
    use crate::balance::balancedness_c;
    use crate::rng::seeded;

    #[test]
    fn agrees_with_the_polynomial() {
        let ctx = AnalysisContext::new(5, 2, 1).unwrap();
        let x = FractionalPoint::new(vec![0.3, 0.5, 0.2, 0.6, 0.4]).unwrap();
        let g = g_value(&ctx, &x).unwrap();
        let trials = 200_000;
        let est = g_via_simulation_consistency(&ctx, &x, trials, &mut seeded(5)).unwrap();
        let sigma = (g * (1.0 - g) / trials as f64).sqrt();
        assert!(
            (est.estimate - g).abs() <= 4.0 * sigma,
            "{} vs {g}",
            est.estimate
        );
    }

    #[test]
    fn symmetric_point_drop_rate() {
        let (n, k) = (6, 3);
        let ctx = AnalysisContext::new(n, k, 0).unwrap();
        let x = FractionalPoint::symmetric(k, n).unwrap();
        let est = g_via_simulation_consistency(&ctx, &x, 200_000, &mut seeded(9)).unwrap();
        let target = 1.0 - balancedness_c(k, n).unwrap();
        assert!((est.estimate - target).abs() <= 4.0 * est.std_error.max(1e-4));
    }

    #[test]
    fn deterministic_points_never_drop() {
        let ctx = AnalysisContext::new(4, 2, 0).unwrap();
        let x = FractionalPoint::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let est = g_via_simulation_consistency(&ctx, &x, 1000, &mut seeded(1)).unwrap();
        assert_eq!(est.dropped, 0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn rejects_impossible_conditioning() {
        let ctx = AnalysisContext::new(3, 1, 2).unwrap();
        let x = FractionalPoint::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(
            g_via_simulation_consistency(&ctx, &x, 10, &mut seeded(0)),
            Err(Error::ZeroProbability(2))
        );
        let y = FractionalPoint::new(vec![0.5, 0.5, 0.5]).unwrap();
        assert!(g_via_simulation_consistency(&ctx, &y, 0, &mut seeded(0)).is_err());
    }
}
