//! Translation ranks, regularity, invertibility, and core probes.
//!
//! Every morphism `g` of a smooth category carries two integers: the rank of
//! the left translation `h |-> g . h` differentiated at the unit over
//! `source(g)` (restricted to the target-fibre tangent frame) and, dually,
//! the rank of the right translation differentiated at the unit over
//! `target(g)`. Both are bounded by the fibre dimension
//! `delta = dim C - dim X`, they need not coincide, and `g` is *regular*
//! exactly when both reach `delta` — then the translations are local
//! diffeomorphisms between fibres.
//!
//! The invertible morphisms (the *core* of the category) are detected by
//! closed forms per family. Openness of the core — an invertible morphism
//! has a whole neighbourhood of invertibles within its stratum — is checked
//! empirically by [`core_probe`].

use crate::categories::{MorphismPoint, Realization};
use crate::error::{Error, Result};
use crate::numerics::{determinant, numerical_rank, solve_min_norm, DenseMatrix, ToleranceConfig};
use crate::thermo;
use rand::Rng;

/// Ranks of the two translations of one morphism, with the regularity
/// verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    /// Rank of the left translation at the source unit, restricted to the
    /// target fibre.
    pub left: usize,
    /// Rank of the right translation at the target unit, restricted to the
    /// source fibre.
    pub right: usize,
    /// The common upper bound `dim C - dim X`.
    pub delta: usize,
    /// True iff `left == delta && right == delta`.
    pub regular: bool,
    /// The tolerance configuration the ranks were decided under.
    pub tolerance: ToleranceConfig,
}

/// Rank of the left translation by `g`, measured at the unit over
/// `source(g)` and restricted to `ker dt` there.
pub fn left_rank(c: &Realization, g: &MorphismPoint, tol: &ToleranceConfig) -> Result<usize> {
    left_rank_at(c, g, None, tol)
}

/// Rank of the right translation by `g`, measured at the unit over
/// `target(g)` and restricted to `ker ds` there.
pub fn right_rank(c: &Realization, g: &MorphismPoint, tol: &ToleranceConfig) -> Result<usize> {
    right_rank_at(c, g, None, tol)
}

/// Left-translation rank at an arbitrary point of the domain fibre
/// (`at = None` means the unit over `source(g)`).
fn left_rank_at(
    c: &Realization,
    g: &MorphismPoint,
    at: Option<&[f64]>,
    tol: &ToleranceConfig,
) -> Result<usize> {
    let s = c.source(g)?;
    let unit = c.unit_chart(s.coords());
    let at = at.unwrap_or(&unit);
    let jac = c.left_translation_jacobian(g.coords(), at, tol)?;
    let frame = c.ker_dt_basis_at(at, tol)?;
    numerical_rank(&jac.matmul(&frame), tol)
}

fn right_rank_at(
    c: &Realization,
    g: &MorphismPoint,
    at: Option<&[f64]>,
    tol: &ToleranceConfig,
) -> Result<usize> {
    let t = c.target(g)?;
    let unit = c.unit_chart(t.coords());
    let at = at.unwrap_or(&unit);
    let jac = c.right_translation_jacobian(g.coords(), at, tol)?;
    let frame = c.ker_ds_basis_at(at, tol)?;
    numerical_rank(&jac.matmul(&frame), tol)
}

/// Both translation ranks of `g` and the regularity verdict.
pub fn rank_report(c: &Realization, g: &MorphismPoint, tol: &ToleranceConfig) -> Result<RankReport> {
    let left = left_rank(c, g, tol)?;
    let right = right_rank(c, g, tol)?;
    let delta = c.delta();
    Ok(RankReport {
        left,
        right,
        delta,
        regular: left == delta && right == delta,
        tolerance: *tol,
    })
}

/// Result of sampling translation ranks away from the units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantRankReport {
    /// Left rank at the unit over `source(g)`.
    pub left_at_unit: usize,
    /// Right rank at the unit over `target(g)`.
    pub right_at_unit: usize,
    /// Number of fibre points probed on each side.
    pub samples: usize,
    /// True iff the left rank was the same at every probed point of the
    /// domain fibre.
    pub left_constant: bool,
    /// True iff the right rank was the same at every probed point.
    pub right_constant: bool,
}

impl ConstantRankReport {
    /// True iff both translations kept their rank at every probed point.
    pub fn is_constant(&self) -> bool {
        self.left_constant && self.right_constant
    }
}

/// Probe whether the translations of `g` have constant rank along their
/// actual domains: the left translation is differentiated at `samples`
/// random points of the target fibre over `source(g)` (not just at its
/// unit), the right translation at points of the source fibre over
/// `target(g)`.
///
/// Families without a fibre sampler (the action categories, whose target
/// fibres are curved level sets) report [`Error::SamplerUnavailable`].
pub fn constant_rank_probe<R: Rng>(
    c: &Realization,
    g: &MorphismPoint,
    samples: usize,
    rng: &mut R,
    tol: &ToleranceConfig,
) -> Result<ConstantRankReport> {
    let left_at_unit = left_rank(c, g, tol)?;
    let right_at_unit = right_rank(c, g, tol)?;
    let s = c.source(g)?;
    let t = c.target(g)?;
    let mut left_constant = true;
    let mut right_constant = true;
    for _ in 0..samples {
        let h = c.sample_t_fibre_near_unit(&s, rng)?;
        if left_rank_at(c, g, Some(h.coords()), tol)? != left_at_unit {
            left_constant = false;
        }
        let k = c.sample_s_fibre_near_unit(&t, rng)?;
        if right_rank_at(c, g, Some(k.coords()), tol)? != right_at_unit {
            right_constant = false;
        }
    }
    Ok(ConstantRankReport {
        left_at_unit,
        right_at_unit,
        samples,
        left_constant,
        right_constant,
    })
}

/// Decide invertibility of `g` by the family's closed form.
///
/// * matrices — determinant test, threshold scaled by the operator norm;
/// * algebras — least-squares solves of `g . x = e` and `y . g = e`, both
///   residuals must vanish at tolerance (finite dimension then forces
///   `x = y`, which is verified);
/// * additive half-space — only the boundary hyperplane (last coordinate
///   exactly zero) inverts;
/// * multiplicative half-line — everything except the absorbing zero;
/// * trivial categories — invertibility of the fibre component;
/// * order category — exactly the units (the diagonal);
/// * entropy category — exactly the reversible processes, `delta S = 0` at
///   machine tolerance;
/// * action categories — invertibility of the acting monoid element.
pub fn is_invertible(c: &Realization, g: &MorphismPoint, tol: &ToleranceConfig) -> Result<bool> {
    if g.coords().len() != c.dim_morphisms() {
        return Err(Error::DimensionMismatch {
            what: format!("morphism coordinates for {}", c.family_name()),
            expected: c.dim_morphisms(),
            found: g.coords().len(),
        });
    }
    let gc = g.coords();
    match c {
        Realization::MatrixMonoid { n } => {
            let a = DenseMatrix::from_row_major(*n, *n, gc.to_vec())?;
            let det = determinant(&a)?;
            let scale = 1.0 + a.norm_inf().powi(*n as i32);
            Ok(det.abs() > 1e-10 * scale)
        }
        Realization::AlgebraMonoid { algebra } => {
            let e = algebra.unit();
            let l = algebra.left_mult_matrix(gc);
            let r = algebra.right_mult_matrix(gc);
            let (x, res_l) = solve_min_norm(&l, e, tol)?;
            let (y, res_r) = solve_min_norm(&r, e, tol)?;
            let scale = 1.0 + gc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let threshold = 1e-8 * scale;
            if res_l > threshold || res_r > threshold {
                return Ok(false);
            }
            // In finite dimension the one-sided inverses coincide; a large
            // disagreement means the solves are untrustworthy here.
            let agree = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let x_scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if agree > 1e-6 * x_scale {
                return Err(Error::InvalidResult {
                    detail: format!(
                        "one-sided inverses disagree by {agree:e}; element too ill-conditioned to classify"
                    ),
                });
            }
            Ok(true)
        }
        Realization::HalfSpaceAdd { n } => Ok(gc[*n - 1] == 0.0),
        Realization::HalfLineMul => Ok(gc[0] > 0.0),
        Realization::TrivialCategory { dim_x, inner } => {
            let dm = inner.dim_morphisms();
            let inner_g = inner.morphism(&gc[*dim_x..dim_x + dm])?;
            is_invertible(inner, &inner_g, tol)
        }
        Realization::OrderCategory => Ok(gc[0] == gc[1]),
        Realization::EntropyCategory { n } => {
            let sq = thermo::Configuration::from_chart(&gc[..*n])?;
            let sp = thermo::Configuration::from_chart(&gc[*n..])?;
            let ds = thermo::delta_entropy(&sq, &sp)?;
            Ok(ds.abs() <= thermo::STATE_MARGIN)
        }
        Realization::ActionCategory { monoid, .. } => {
            let dm = monoid.dim_morphisms();
            let inner_g = monoid.morphism(&gc[..dm])?;
            is_invertible(monoid, &inner_g, tol)
        }
    }
}

/// Outcome of a neighbourhood probe around an invertible morphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreProbe {
    /// Points drawn from the stratum-respecting neighbourhood.
    pub samples: usize,
    /// How many of them were invertible.
    pub invertible: usize,
}

impl CoreProbe {
    /// Fraction of probed neighbours that were invertible; 1.0 is the
    /// expected answer for small radii, since the core is open in its
    /// stratum.
    pub fn fraction(&self) -> f64 {
        if self.samples == 0 {
            return 1.0;
        }
        self.invertible as f64 / self.samples as f64
    }
}

/// Sample `samples` valid morphisms within `radius` of the invertible
/// morphism `g` (respecting the stratum carrying `g`, e.g. the diagonal of
/// the order category) and count how many are invertible.
///
/// Errors with [`Error::NotInvertible`] if `g` itself is not invertible —
/// openness of the core says nothing about neighbourhoods of non-invertible
/// morphisms.
pub fn core_probe<R: Rng>(
    c: &Realization,
    g: &MorphismPoint,
    radius: f64,
    samples: usize,
    rng: &mut R,
    tol: &ToleranceConfig,
) -> Result<CoreProbe> {
    if !is_invertible(c, g, tol)? {
        return Err(Error::NotInvertible {
            detail: format!(
                "core probe needs an invertible centre; this {} morphism is not",
                c.family_name()
            ),
        });
    }
    let mut invertible = 0;
    for _ in 0..samples {
        let h = c.sample_near(g, radius, rng)?;
        if is_invertible(c, &h, tol)? {
            invertible += 1;
        }
    }
    Ok(CoreProbe {
        samples,
        invertible,
    })
}
