//! Invariant vector fields, their flows, the exponential map, brackets, and
//! naturality of the exponential under homomorphisms.
//!
//! A left-invariant vector field assigns to every morphism `g` the vector
//! `dL_g(v(source(g)))`, where `v` picks a target-fibre tangent vector at
//! each unit. Such fields are tangent to the target fibres, so their flows
//! keep the target fixed and satisfy the translation identity
//! `flow_t(g) = g . flow_t(unit at source(g))`. On a monoid the time-one
//! flow from the unit is the exponential map; on a manifold with boundary it
//! exists only for vectors pointing inward, and the integrator reports the
//! exit honestly for the rest.
//!
//! Brackets of invariant fields are computed dynamically, as the
//! second-order defect of the flow commutator, on the *ambient* chart: the
//! bracket is a one-sided differential object along the boundary, so the
//! commutator loop is allowed to cut outside the valid set on its way back.

use crate::categories::{MorphismPoint, ObjectPoint, Realization};
use crate::error::{Error, Result};
use crate::numerics::{fd_jacobian, rk4_flow, DenseMatrix, ToleranceConfig};
use rand::Rng;

/// Maximal distance of a computed bracket from the target-fibre tangent
/// plane at the unit (the bracket of two fibre-tangent fields must be
/// fibre-tangent again).
pub const BRACKET_PROJECTION_TOL: f64 = 1e-4;

/// Base step for the flow-commutator bracket; one Richardson extrapolation
/// round is applied on top of it.
pub const BRACKET_STEP: f64 = 1e-3;

/// Tolerance for the sampled homomorphism law in [`naturality_check`].
pub const HOM_LAW_TOL: f64 = 1e-8;

/// How a left-invariant vector field is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum SectionSpec {
    /// Coefficients in the orthonormal target-fibre frame computed at each
    /// unit (length `delta`). Works for every family; for monoids the frame
    /// is the identity, so coefficients are chart coordinates.
    FrameCoefficients(Vec<f64>),
    /// A raw tangent vector at the unique unit of a monoid, in chart
    /// coordinates (length `dim C`). Monoids only.
    MonoidVector(Vec<f64>),
}

impl SectionSpec {
    /// The fibre-frame coefficient vector this section was built from, as
    /// given.
    pub fn coefficients(&self) -> &[f64] {
        match self {
            SectionSpec::FrameCoefficients(c) => c,
            SectionSpec::MonoidVector(v) => v,
        }
    }
}

/// Endpoint of an invariant flow, with honest exit reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    /// The last valid state reached (the endpoint itself when `exited` is
    /// false).
    pub endpoint: MorphismPoint,
    /// Signed time actually integrated; equals the requested time iff
    /// `exited` is false, and is resolved to one step width otherwise.
    pub t_reached: f64,
    /// True iff the trajectory left the valid set before the requested
    /// time.
    pub exited: bool,
}

/// The section's value at the unit over the given source coordinates, as an
/// ambient tangent vector.
fn section_vector(
    c: &Realization,
    section: &SectionSpec,
    source_coords: &[f64],
    tol: &ToleranceConfig,
) -> Result<Vec<f64>> {
    match section {
        SectionSpec::MonoidVector(v) => {
            if !c.is_monoid() {
                return Err(Error::UnsupportedFamily {
                    op: "monoid-vector section",
                    family: c.family_name().into(),
                });
            }
            if v.len() != c.dim_morphisms() {
                return Err(Error::DimensionMismatch {
                    what: "monoid tangent vector".into(),
                    expected: c.dim_morphisms(),
                    found: v.len(),
                });
            }
            Ok(v.clone())
        }
        SectionSpec::FrameCoefficients(coeffs) => {
            if coeffs.len() != c.delta() {
                return Err(Error::DimensionMismatch {
                    what: "fibre-frame coefficients".into(),
                    expected: c.delta(),
                    found: coeffs.len(),
                });
            }
            let unit = c.unit_chart(source_coords);
            let frame = c.ker_dt_basis_at(&unit, tol)?;
            Ok(frame.matvec(coeffs))
        }
    }
}

/// Evaluate the left-invariant extension of `section` at ambient morphism
/// coordinates `y`: transport the section's value at the unit over
/// `source(y)` by the differential of the left translation by `y`.
pub fn left_invariant_eval(
    c: &Realization,
    section: &SectionSpec,
    y: &[f64],
    tol: &ToleranceConfig,
) -> Result<Vec<f64>> {
    if y.len() != c.dim_morphisms() {
        return Err(Error::DimensionMismatch {
            what: "morphism coordinates".into(),
            expected: c.dim_morphisms(),
            found: y.len(),
        });
    }
    let s = c.source_chart(y);
    let v = section_vector(c, section, &s, tol)?;
    match c {
        // Families whose left translations are linear in the second factor:
        // the differential is composition itself.
        Realization::MatrixMonoid { .. }
        | Realization::AlgebraMonoid { .. }
        | Realization::HalfLineMul => Ok(c.compose_chart(y, &v)),
        _ => {
            let unit = c.unit_chart(&s);
            let jac = c.left_translation_jacobian(y, &unit, tol)?;
            Ok(jac.matvec(&v))
        }
    }
}

/// Flow the left-invariant extension of `section` from `g` for signed time
/// `t`, stopping at the boundary of the valid set.
pub fn flow_left_invariant(
    c: &Realization,
    section: &SectionSpec,
    g: &MorphismPoint,
    t: f64,
    tol: &ToleranceConfig,
) -> Result<FlowResult> {
    if g.coords().len() != c.dim_morphisms() {
        return Err(Error::DimensionMismatch {
            what: "morphism coordinates".into(),
            expected: c.dim_morphisms(),
            found: g.coords().len(),
        });
    }
    let outcome = rk4_flow(
        |y| left_invariant_eval(c, section, y, tol),
        |y| c.morphism_valid_coords_with(y, tol),
        g.coords(),
        t,
        tol,
    );
    match outcome {
        Ok(endpoint) => Ok(FlowResult {
            endpoint: c.morphism_unchecked(endpoint),
            t_reached: t,
            exited: false,
        }),
        Err(Error::DomainExit {
            t_reached, state, ..
        }) => Ok(FlowResult {
            endpoint: c.morphism_unchecked(state),
            t_reached,
            exited: true,
        }),
        Err(other) => Err(other),
    }
}

/// Exponential of a monoid tangent vector: the time-one flow of its
/// left-invariant extension from the unit.
///
/// Vectors pointing out of the valid set at the unit (or whose flow leaves
/// it before time one) have no exponential; those report
/// [`Error::OutwardVector`].
pub fn exp_monoid(c: &Realization, v: &[f64], tol: &ToleranceConfig) -> Result<MorphismPoint> {
    if !c.is_monoid() {
        return Err(Error::UnsupportedFamily {
            op: "exp_monoid",
            family: c.family_name().into(),
        });
    }
    if v.len() != c.dim_morphisms() {
        return Err(Error::DimensionMismatch {
            what: "monoid tangent vector".into(),
            expected: c.dim_morphisms(),
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "monoid tangent vector".into(),
        });
    }
    let e = c.unit_chart(&[]);
    // First-order inward probe: a vector leaving the valid set immediately
    // is rejected before any integration.
    let probe: Vec<f64> = e.iter().zip(v).map(|(ei, vi)| ei + tol.fd_step * vi).collect();
    if !c.morphism_valid_coords_with(&probe, tol) {
        return Err(Error::OutwardVector {
            detail: "vector points out of the valid set at the unit".into(),
        });
    }
    let unit = c.morphism_unchecked(e);
    let section = SectionSpec::MonoidVector(v.to_vec());
    let flow = flow_left_invariant(c, &section, &unit, 1.0, tol)?;
    if flow.exited {
        return Err(Error::OutwardVector {
            detail: format!(
                "flow left the valid set at time {:.3e} before reaching time one",
                flow.t_reached
            ),
        });
    }
    Ok(flow.endpoint)
}

/// A bracket of two invariant fields at a unit, reported both as an ambient
/// tangent vector and in the target-fibre frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketResult {
    /// Ambient chart coordinates of the bracket vector at the unit.
    pub ambient: Vec<f64>,
    /// Coefficients in the orthonormal target-fibre frame at the unit.
    pub frame: Vec<f64>,
    /// Distance (infinity norm) from the ambient vector to its fibre-frame
    /// reconstruction; small by construction of the bracket.
    pub projection_residual: f64,
}

/// Bracket of the left-invariant extensions of `alpha` and `beta` at the
/// unit over `x`, via the second-order defect of the flow commutator
/// (forward `alpha`, forward `beta`, backward `alpha`, backward `beta`)
/// with one Richardson round. For matrix monoids this recovers the matrix
/// commutator of the two vectors.
///
/// The commutator loop is integrated on the ambient chart, ignoring the
/// validity cut: along a boundary the bracket is still defined one-sidedly,
/// and the loop may legitimately graze the outside on its way back to the
/// unit.
pub fn bracket_at_unit(
    c: &Realization,
    alpha: &SectionSpec,
    beta: &SectionSpec,
    x: &ObjectPoint,
    tol: &ToleranceConfig,
) -> Result<BracketResult> {
    let e = c.unit_chart(x.coords());

    let commutator_loop = |h: f64| -> Result<Vec<f64>> {
        let legs = [(alpha, h), (beta, h), (alpha, -h), (beta, -h)];
        let mut y = e.clone();
        for (section, time) in legs {
            y = rk4_flow(
                |z| left_invariant_eval(c, section, z, tol),
                |_| true,
                &y,
                time,
                tol,
            )?;
        }
        Ok(y)
    };

    let defect = |h: f64| -> Result<Vec<f64>> {
        let loop_end = commutator_loop(h)?;
        Ok(loop_end
            .iter()
            .zip(&e)
            .map(|(a, b)| (a - b) / (h * h))
            .collect())
    };

    let coarse = defect(BRACKET_STEP)?;
    let fine = defect(BRACKET_STEP / 2.0)?;
    let ambient: Vec<f64> = fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| 2.0 * f - c)
        .collect();

    let frame_basis = c.ker_dt_basis_at(&e, tol)?;
    let frame = frame_basis.transpose().matvec(&ambient);
    let reconstructed = frame_basis.matvec(&frame);
    let projection_residual = ambient
        .iter()
        .zip(&reconstructed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if projection_residual > BRACKET_PROJECTION_TOL {
        return Err(Error::InvalidResult {
            detail: format!(
                "bracket sticks out of the target-fibre tangent plane by {projection_residual:e}"
            ),
        });
    }
    Ok(BracketResult {
        ambient,
        frame,
        projection_residual,
    })
}

/// The anchor at an object: the differential of the source projection
/// restricted to the target-fibre frame at the unit, i.e. how fibre
/// directions push down to the objects. Rank of any left translation is
/// bounded below by the rank of the anchor at its source.
pub fn anchor_matrix(c: &Realization, x: &ObjectPoint, tol: &ToleranceConfig) -> Result<DenseMatrix> {
    let e = c.unit_chart(x.coords());
    let frame = c.ker_dt_basis_at(&e, tol)?;
    let ds = fd_jacobian(|y| Some(c.source_chart(y)), &e, tol)?;
    Ok(ds.matmul(&frame))
}

/// A homomorphism between two monoid realizations, given by its chart map.
pub struct MonoidHom {
    name: String,
    source: Realization,
    target: Realization,
    map: Box<dyn Fn(&[f64]) -> Result<Vec<f64>>>,
}

impl std::fmt::Debug for MonoidHom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonoidHom")
            .field("name", &self.name)
            .field("source", &self.source.family_name())
            .field("target", &self.target.family_name())
            .finish()
    }
}

impl MonoidHom {
    /// A homomorphism from an arbitrary chart map; the map is *checked*
    /// against the homomorphism law only when a naturality check runs.
    pub fn from_chart_map<F>(
        name: impl Into<String>,
        source: Realization,
        target: Realization,
        map: F,
    ) -> Result<MonoidHom>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + 'static,
    {
        if !source.is_monoid() || !target.is_monoid() {
            return Err(Error::InvalidSpec {
                detail: "monoid homomorphisms need monoid endpoints".into(),
            });
        }
        Ok(MonoidHom {
            name: name.into(),
            source,
            target,
            map: Box::new(map),
        })
    }

    /// The determinant, from `n x n` matrices to `1 x 1` matrices (the
    /// multiplicative reals): multiplicative, unit-preserving, and total.
    /// Its differential at the identity is the trace, so naturality here is
    /// the classical `det(exp(t v)) = exp(t tr v)`.
    pub fn determinant(n: usize) -> Result<MonoidHom> {
        let source = Realization::matrix_monoid(n)?;
        let target = Realization::matrix_monoid(1)?;
        MonoidHom::from_chart_map("determinant", source, target, move |g| {
            let a = DenseMatrix::from_row_major(n, n, g.to_vec())?;
            Ok(vec![crate::numerics::determinant(&a)?])
        })
    }

    /// The identity homomorphism of a monoid realization.
    pub fn identity(monoid: Realization) -> Result<MonoidHom> {
        if !monoid.is_monoid() {
            return Err(Error::InvalidSpec {
                detail: "identity homomorphism needs a monoid".into(),
            });
        }
        MonoidHom::from_chart_map("identity", monoid.clone(), monoid, |g| Ok(g.to_vec()))
    }

    /// Inclusion of a lower-dimensional additive half-space into a higher
    /// one, inserting zeros so that the half-bounded coordinate stays last.
    /// The image is the boundary stratum of the larger half-space when the
    /// included half-coordinate is pinned at zero — the prototypical
    /// boundary-submonoid inclusion.
    pub fn half_space_inclusion(k: usize, n: usize) -> Result<MonoidHom> {
        if k > n {
            return Err(Error::InvalidSpec {
                detail: format!("cannot include a half-space of dimension {k} into {n}"),
            });
        }
        let source = Realization::half_space_add(k)?;
        let target = Realization::half_space_add(n)?;
        MonoidHom::from_chart_map("half_space_inclusion", source, target, move |g| {
            let mut out = vec![0.0; n];
            out[..k - 1].copy_from_slice(&g[..k - 1]);
            out[n - 1] = g[k - 1];
            Ok(out)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Realization {
        &self.source
    }

    pub fn target(&self) -> &Realization {
        &self.target
    }

    /// Apply the chart map.
    pub fn apply_chart(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.source.dim_morphisms() {
            return Err(Error::DimensionMismatch {
                what: "homomorphism argument".into(),
                expected: self.source.dim_morphisms(),
                found: g.len(),
            });
        }
        let out = (self.map)(g)?;
        if out.len() != self.target.dim_morphisms() {
            return Err(Error::DimensionMismatch {
                what: "homomorphism value".into(),
                expected: self.target.dim_morphisms(),
                found: out.len(),
            });
        }
        Ok(out)
    }

    /// Differential at the unit, by finite differences of the chart map.
    pub fn differential_at_unit(&self, tol: &ToleranceConfig) -> Result<DenseMatrix> {
        let e = self.source.unit_chart(&[]);
        fd_jacobian(|g| (self.map)(g).ok(), &e, tol)
    }
}

/// Outcome of a naturality check: the exponential intertwines the
/// homomorphism and its differential.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalityReport {
    /// Largest sampled violation of the homomorphism law (chart level).
    pub hom_law_residual: f64,
    /// Deviation `| hom(exp(t v)) - exp(t dhom(v)) |` per grid time.
    pub deviations: Vec<(f64, f64)>,
    /// Maximum of the deviations.
    pub max_deviation: f64,
}

/// Check that `hom(exp(t v)) = exp(t dhom(v))` along a time grid.
///
/// First the homomorphism law `hom(g . h) = hom(g) . hom(h)` and unit
/// preservation are sampled on `law_samples` random pairs (chart level,
/// scale-aware tolerance [`HOM_LAW_TOL`]); a violation reports
/// [`Error::NotHomomorphism`] — naturality is meaningless for a
/// non-homomorphism. Then both sides of the naturality square are computed
/// for each `t` in `t_grid` and the largest pointwise deviation is
/// reported.
pub fn naturality_check<R: Rng>(
    hom: &MonoidHom,
    v: &[f64],
    t_grid: &[f64],
    law_samples: usize,
    rng: &mut R,
    tol: &ToleranceConfig,
) -> Result<NaturalityReport> {
    let src = hom.source();
    let tgt = hom.target();

    // Unit preservation.
    let unit_image = hom.apply_chart(&src.unit_chart(&[]))?;
    let unit_target = tgt.unit_chart(&[]);
    let mut hom_law_residual = unit_image
        .iter()
        .zip(&unit_target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if hom_law_residual > HOM_LAW_TOL {
        return Err(Error::NotHomomorphism {
            detail: format!("unit is not preserved (residual {hom_law_residual:e})"),
        });
    }

    // Multiplicativity on random pairs.
    for _ in 0..law_samples {
        let g = src.sample_morphism(rng);
        let h = src.sample_morphism(rng);
        let lhs = hom.apply_chart(&src.compose_chart(g.coords(), h.coords()))?;
        let fg = hom.apply_chart(g.coords())?;
        let fh = hom.apply_chart(h.coords())?;
        let rhs = tgt.compose_chart(&fg, &fh);
        let scale = 1.0
            + lhs
                .iter()
                .chain(&rhs)
                .fold(0.0f64, |m, x| m.max(x.abs()));
        let residual = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale;
        hom_law_residual = hom_law_residual.max(residual);
        if residual > HOM_LAW_TOL {
            return Err(Error::NotHomomorphism {
                detail: format!("composition is not preserved (relative residual {residual:e})"),
            });
        }
    }

    // dhom(v), then the two routes around the square.
    let dhom = hom.differential_at_unit(tol)?;
    let w = dhom.matvec(v);
    let mut deviations = Vec::with_capacity(t_grid.len());
    let mut max_deviation = 0.0f64;
    for &t in t_grid {
        let tv: Vec<f64> = v.iter().map(|a| a * t).collect();
        let tw: Vec<f64> = w.iter().map(|a| a * t).collect();
        let through_source = hom.apply_chart(exp_monoid(src, &tv, tol)?.coords())?;
        let through_target = exp_monoid(tgt, &tw, tol)?;
        let dev = through_source
            .iter()
            .zip(through_target.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        deviations.push((t, dev));
        max_deviation = max_deviation.max(dev);
    }
    Ok(NaturalityReport {
        hom_law_residual,
        deviations,
        max_deviation,
    })
}
