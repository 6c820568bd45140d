//! Concrete realizations of smooth categories and monoids, possibly with
//! boundary.
//!
//! A realization fixes global chart conventions for a small category whose
//! morphism and object spaces are manifolds (with corners) and whose
//! structure maps are smooth: coordinates for morphisms and objects, the
//! source/target projections, units, the composition formula, and a validity
//! predicate cutting the morphism set out of its ambient chart. Everything
//! downstream (ranks, invariant flows, probes) is family-agnostic and works
//! through this interface.
//!
//! The families:
//!
//! * `MatrixMonoid(n)` — all real `n x n` matrices under multiplication
//!   (row-major coordinates, one object);
//! * `AlgebraMonoid` — a finite-dimensional associative unital algebra given
//!   by structure constants, under algebra multiplication;
//! * `HalfSpaceAdd(n)` — the additive monoid `R^{n-1} x [0, inf)`; the unit
//!   sits **on** the boundary, which makes it the minimal example where only
//!   inward vectors exponentiate;
//! * `HalfLineMul` — `[0, inf)` under multiplication; here the unit 1 is
//!   interior and 0 is an absorbing boundary point;
//! * `TrivialCategory(X, M)` — morphisms `(z, g, x)` over base `X = R^k`
//!   with `(z, g, y) . (y, h, x) = (z, g h, x)`; source and target are the
//!   outer coordinates;
//! * `OrderCategory` — pairs `(y, x)` with `x <= y` composing by
//!   transitivity `(z, y) . (y, x) = (z, x)`; the units are the diagonal,
//!   which is exactly the boundary and exactly the invertibles;
//! * `EntropyCategory(n)` — admissible processes `(q, p)` between interior,
//!   non-uniform probability configurations with `S(q) - S(p) >= 0`, in the
//!   chart dropping `p_0`; composition chains processes;
//! * `ActionCategory` — pairs `(g, x)` for a monoid acting on `R^k`,
//!   restricted to the points where the action map is submersive (there the
//!   composition `(g, h x) . (h, x) = (g h, x)` stays inside the
//!   restriction, which is asserted at run time).
//!
//! Validity of an `ActionCategory` morphism is decided by a *numerical* rank
//! at the configured tolerance, so every answer about it is implicitly
//! "at tolerance"; the CLI records the tolerance in its reports for this
//! family.

use crate::error::{Error, Result};
use crate::numerics::{fd_jacobian, nullspace_basis, numerical_rank, DenseMatrix, ToleranceConfig};
use crate::thermo;
use rand::Rng;
use rand_distr::StandardNormal;

/// Composability test: infinity-norm mismatch between `source(g)` and
/// `target(h)` must not exceed this.
pub const COMPOSABILITY_TOL: f64 = 1e-9;

/// Unit laws and algebra unit checks hold to this absolute tolerance.
pub const UNIT_LAW_TOL: f64 = 1e-12;

/// Maximal associativity residue accepted when validating structure
/// constants.
pub const ALGEBRA_ASSOC_TOL: f64 = 1e-9;

/// A finite-dimensional associative unital algebra, presented by structure
/// constants `c[i][j][k]` (stored flat, `(i * d + j) * d + k`) so that the
/// product of basis vectors is `e_i e_j = sum_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraSpec {
    dim: usize,
    structure: Vec<f64>,
    unit: Vec<f64>,
}

impl AlgebraSpec {
    /// Validate structure constants and unit coordinates.
    ///
    /// Checks shapes and finiteness, associativity on all basis triples
    /// (residue at most [`ALGEBRA_ASSOC_TOL`]) and the two-sided unit laws
    /// (to [`UNIT_LAW_TOL`]).
    pub fn new(dim: usize, structure: Vec<f64>, unit: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec {
                detail: "algebra dimension must be positive".into(),
            });
        }
        if structure.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                what: "structure constant table".into(),
                expected: dim * dim * dim,
                found: structure.len(),
            });
        }
        if unit.len() != dim {
            return Err(Error::DimensionMismatch {
                what: "algebra unit coordinates".into(),
                expected: dim,
                found: unit.len(),
            });
        }
        if structure.iter().chain(unit.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "algebra spec entries".into(),
            });
        }
        let spec = AlgebraSpec {
            dim,
            structure,
            unit,
        };
        // Associativity on basis triples: (e_i e_j) e_k = e_i (e_j e_k).
        let mut basis = vec![0.0; dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    basis.iter_mut().for_each(|v| *v = 0.0);
                    basis[i] = 1.0;
                    let ei = basis.clone();
                    basis[i] = 0.0;
                    basis[j] = 1.0;
                    let ej = basis.clone();
                    basis[j] = 0.0;
                    basis[k] = 1.0;
                    let ek = basis.clone();
                    let left = spec.product(&spec.product(&ei, &ej), &ek);
                    let right = spec.product(&ei, &spec.product(&ej, &ek));
                    let residue = left
                        .iter()
                        .zip(&right)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    if residue > ALGEBRA_ASSOC_TOL {
                        return Err(Error::InvalidSpec {
                            detail: format!(
                                "associativity fails on basis triple ({i},{j},{k}), residue {residue:e}"
                            ),
                        });
                    }
                }
            }
        }
        // Unit laws on basis vectors.
        for j in 0..dim {
            basis.iter_mut().for_each(|v| *v = 0.0);
            basis[j] = 1.0;
            let left = spec.product(&spec.unit, &basis);
            let right = spec.product(&basis, &spec.unit);
            for k in 0..dim {
                let expect = if k == j { 1.0 } else { 0.0 };
                if (left[k] - expect).abs() > UNIT_LAW_TOL || (right[k] - expect).abs() > UNIT_LAW_TOL
                {
                    return Err(Error::InvalidSpec {
                        detail: format!("unit laws fail on basis vector {j}"),
                    });
                }
            }
        }
        Ok(spec)
    }

    /// The algebra of upper-triangular real `2 x 2` matrices in the basis
    /// `(a, b, c) = (E11, E22, E12)`, with unit `a + b`.
    ///
    /// The standard counterexample for left/right rank symmetry: left and
    /// right multiplication by `a` have different ranks.
    pub fn upper_triangular_2x2() -> AlgebraSpec {
        let d = 3;
        let mut c = vec![0.0; d * d * d];
        let mut set = |i: usize, j: usize, k: usize, v: f64| c[(i * d + j) * d + k] = v;
        // a*a = a, a*c = c, b*b = b, c*b = c; all other basis products vanish.
        set(0, 0, 0, 1.0);
        set(0, 2, 2, 1.0);
        set(1, 1, 1, 1.0);
        set(2, 1, 2, 1.0);
        AlgebraSpec::new(d, c, vec![1.0, 1.0, 0.0]).expect("triangular algebra is associative")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self) -> &[f64] {
        &self.structure
    }

    pub fn unit(&self) -> &[f64] {
        &self.unit
    }

    fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    /// Algebra product in coordinates.
    pub fn product(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if b[j] == 0.0 {
                    continue;
                }
                for k in 0..d {
                    out[k] += a[i] * b[j] * self.c(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of left multiplication by `g`: column `j` is `g * e_j`.
    pub fn left_mult_matrix(&self, g: &[f64]) -> DenseMatrix {
        let d = self.dim;
        let mut m = DenseMatrix::zeros(d, d);
        for k in 0..d {
            for j in 0..d {
                let mut v = 0.0;
                for i in 0..d {
                    v += g[i] * self.c(i, j, k);
                }
                m.set(k, j, v);
            }
        }
        m
    }

    /// Matrix of right multiplication by `g`: column `i` is `e_i * g`.
    pub fn right_mult_matrix(&self, g: &[f64]) -> DenseMatrix {
        let d = self.dim;
        let mut m = DenseMatrix::zeros(d, d);
        for k in 0..d {
            for i in 0..d {
                let mut v = 0.0;
                for j in 0..d {
                    v += g[j] * self.c(i, j, k);
                }
                m.set(k, i, v);
            }
        }
        m
    }
}

/// Built-in actions available to `ActionCategory`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    /// `[0, inf)` under multiplication acting on the line by scaling,
    /// `phi(g, x) = g x`.
    Scale,
    /// `n x n` matrices acting on `R^n` by application, `phi(A, x) = A x`.
    MatrixApply,
}

impl ActionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ActionKind::Scale => "scale",
            ActionKind::MatrixApply => "matrix_apply",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "scale" => Ok(ActionKind::Scale),
            "matrix_apply" => Ok(ActionKind::MatrixApply),
            other => Err(Error::Parse {
                detail: format!("unknown action `{other}` (expected scale or matrix_apply)"),
            }),
        }
    }

    /// Evaluate the action in ambient chart coordinates.
    fn apply(&self, g: &[f64], x: &[f64]) -> Vec<f64> {
        match self {
            ActionKind::Scale => vec![g[0] * x[0]],
            ActionKind::MatrixApply => {
                let n = x.len();
                (0..n)
                    .map(|i| (0..n).map(|j| g[i * n + j] * x[j]).sum())
                    .collect()
            }
        }
    }
}

/// A point of the object manifold of some realization, in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectPoint {
    coords: Vec<f64>,
}

impl ObjectPoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A point of the morphism manifold of some realization, in chart
/// coordinates. Constructed through [`Realization::morphism`], which
/// enforces the family's validity predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphismPoint {
    coords: Vec<f64>,
}

impl MorphismPoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A concrete category realization; see the module docs for the families.
#[derive(Debug, Clone, PartialEq)]
pub enum Realization {
    MatrixMonoid { n: usize },
    AlgebraMonoid { algebra: AlgebraSpec },
    HalfSpaceAdd { n: usize },
    HalfLineMul,
    TrivialCategory { dim_x: usize, inner: Box<Realization> },
    OrderCategory,
    EntropyCategory { n: usize },
    ActionCategory {
        monoid: Box<Realization>,
        action: ActionKind,
        dim_x: usize,
    },
}

impl Realization {
    pub fn matrix_monoid(n: usize) -> Result<Realization> {
        if n == 0 {
            return Err(Error::BadDimension {
                detail: "matrix monoid needs n >= 1".into(),
            });
        }
        Ok(Realization::MatrixMonoid { n })
    }

    pub fn algebra_monoid(algebra: AlgebraSpec) -> Realization {
        Realization::AlgebraMonoid { algebra }
    }

    pub fn half_space_add(n: usize) -> Result<Realization> {
        if n == 0 {
            return Err(Error::BadDimension {
                detail: "additive half-space needs n >= 1".into(),
            });
        }
        Ok(Realization::HalfSpaceAdd { n })
    }

    pub fn half_line_mul() -> Realization {
        Realization::HalfLineMul
    }

    pub fn trivial_category(dim_x: usize, inner: Realization) -> Result<Realization> {
        if dim_x == 0 {
            return Err(Error::BadDimension {
                detail: "trivial category needs a base of dimension >= 1".into(),
            });
        }
        if !inner.is_monoid() {
            return Err(Error::InvalidSpec {
                detail: format!(
                    "trivial category needs a monoid fibre, got {}",
                    inner.family_name()
                ),
            });
        }
        Ok(Realization::TrivialCategory {
            dim_x,
            inner: Box::new(inner),
        })
    }

    pub fn order_category() -> Realization {
        Realization::OrderCategory
    }

    pub fn entropy_category(n: usize) -> Result<Realization> {
        if n == 0 {
            return Err(Error::BadDimension {
                detail: "entropy category needs n >= 1".into(),
            });
        }
        Ok(Realization::EntropyCategory { n })
    }

    /// Action categories pair a named action with the monoid it belongs to;
    /// the combination is validated here.
    pub fn action_category(monoid: Realization, action: ActionKind, dim_x: usize) -> Result<Realization> {
        match action {
            ActionKind::Scale => {
                if !matches!(monoid, Realization::HalfLineMul) || dim_x != 1 {
                    return Err(Error::InvalidSpec {
                        detail: "action `scale` needs the multiplicative half-line acting on R^1"
                            .into(),
                    });
                }
            }
            ActionKind::MatrixApply => {
                let ok = matches!(monoid, Realization::MatrixMonoid { n } if n == dim_x);
                if !ok {
                    return Err(Error::InvalidSpec {
                        detail: "action `matrix_apply` needs MatrixMonoid(n) acting on R^n".into(),
                    });
                }
            }
        }
        Ok(Realization::ActionCategory {
            monoid: Box::new(monoid),
            action,
            dim_x,
        })
    }

    /// Short family tag used in reports and error messages.
    pub fn family_name(&self) -> &'static str {
        match self {
            Realization::MatrixMonoid { .. } => "matrix_monoid",
            Realization::AlgebraMonoid { .. } => "algebra_monoid",
            Realization::HalfSpaceAdd { .. } => "half_space_add",
            Realization::HalfLineMul => "half_line_mul",
            Realization::TrivialCategory { .. } => "trivial_category",
            Realization::OrderCategory => "order_category",
            Realization::EntropyCategory { .. } => "entropy_category",
            Realization::ActionCategory { .. } => "action_category",
        }
    }

    /// Dimension of the morphism chart.
    pub fn dim_morphisms(&self) -> usize {
        match self {
            Realization::MatrixMonoid { n } => n * n,
            Realization::AlgebraMonoid { algebra } => algebra.dim(),
            Realization::HalfSpaceAdd { n } => *n,
            Realization::HalfLineMul => 1,
            Realization::TrivialCategory { dim_x, inner } => 2 * dim_x + inner.dim_morphisms(),
            Realization::OrderCategory => 2,
            Realization::EntropyCategory { n } => 2 * n,
            Realization::ActionCategory { monoid, dim_x, .. } => monoid.dim_morphisms() + dim_x,
        }
    }

    /// Dimension of the object chart (0 for monoids).
    pub fn dim_objects(&self) -> usize {
        match self {
            Realization::MatrixMonoid { .. }
            | Realization::AlgebraMonoid { .. }
            | Realization::HalfSpaceAdd { .. }
            | Realization::HalfLineMul => 0,
            Realization::TrivialCategory { dim_x, .. } => *dim_x,
            Realization::OrderCategory => 1,
            Realization::EntropyCategory { n } => *n,
            Realization::ActionCategory { dim_x, .. } => *dim_x,
        }
    }

    /// Fibre dimension `dim C - dim X`: the rank both translations attain
    /// exactly at the regular morphisms.
    pub fn delta(&self) -> usize {
        self.dim_morphisms() - self.dim_objects()
    }

    pub fn is_monoid(&self) -> bool {
        self.dim_objects() == 0
    }

    /// The unique object of a monoid (empty chart), if this is one.
    pub fn unique_object(&self) -> Option<ObjectPoint> {
        if self.is_monoid() {
            Some(ObjectPoint { coords: Vec::new() })
        } else {
            None
        }
    }

    // ----- validity ---------------------------------------------------

    /// Validity predicate on raw object coordinates (length must already
    /// match `dim_objects`).
    pub fn object_valid_coords(&self, x: &[f64]) -> bool {
        if x.len() != self.dim_objects() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Realization::EntropyCategory { .. } => match thermo::Configuration::from_chart(x) {
                Ok(c) => thermo::is_valid_state(&c),
                Err(_) => false,
            },
            _ => true,
        }
    }

    /// Validity predicate on raw morphism coordinates (length must already
    /// match `dim_morphisms`). Total and cheap, so integrators can poll it
    /// along trajectories. Uses the default tolerances where the predicate
    /// is itself a rank decision; see [`Self::morphism_valid_coords_with`].
    pub fn morphism_valid_coords(&self, g: &[f64]) -> bool {
        self.morphism_valid_coords_with(g, &ToleranceConfig::default())
    }

    /// Validity predicate with an explicit tolerance configuration. Only
    /// `ActionCategory` consults it (membership there is a numerical rank
    /// decision); every other family's predicate is tolerance-free.
    pub fn morphism_valid_coords_with(&self, g: &[f64], tol: &ToleranceConfig) -> bool {
        if g.len() != self.dim_morphisms() || g.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Realization::MatrixMonoid { .. } | Realization::AlgebraMonoid { .. } => true,
            Realization::HalfSpaceAdd { n } => g[n - 1] >= 0.0,
            Realization::HalfLineMul => g[0] >= 0.0,
            Realization::TrivialCategory { dim_x, inner } => {
                inner.morphism_valid_coords_with(&g[*dim_x..g.len() - dim_x], tol)
            }
            Realization::OrderCategory => g[1] <= g[0],
            Realization::EntropyCategory { n } => {
                let (q, p) = (&g[..*n], &g[*n..]);
                if !self.object_valid_coords(q) || !self.object_valid_coords(p) {
                    return false;
                }
                let sq = entropy_of_chart(q);
                let sp = entropy_of_chart(p);
                sq - sp >= 0.0
            }
            Realization::ActionCategory { monoid, dim_x, .. } => {
                let dm = monoid.dim_morphisms();
                monoid.morphism_valid_coords_with(&g[..dm], tol)
                    && self
                        .action_regular_coords(&g[..dm], &g[dm..dm + dim_x], tol)
                        .unwrap_or(false)
            }
        }
    }

    /// Validate and wrap object coordinates.
    pub fn object(&self, coords: &[f64]) -> Result<ObjectPoint> {
        if coords.len() != self.dim_objects() {
            return Err(Error::DimensionMismatch {
                what: format!("object coordinates for {}", self.family_name()),
                expected: self.dim_objects(),
                found: coords.len(),
            });
        }
        if !self.object_valid_coords(coords) {
            return Err(Error::InvalidObject {
                detail: format!(
                    "coordinates fail the object predicate of {}",
                    self.family_name()
                ),
            });
        }
        Ok(ObjectPoint {
            coords: coords.to_vec(),
        })
    }

    /// Validate and wrap morphism coordinates.
    pub fn morphism(&self, coords: &[f64]) -> Result<MorphismPoint> {
        self.morphism_with(coords, &ToleranceConfig::default())
    }

    /// Validate and wrap morphism coordinates, deciding any tolerance-
    /// dependent validity (`ActionCategory` submersivity) at `tol`.
    pub fn morphism_with(&self, coords: &[f64], tol: &ToleranceConfig) -> Result<MorphismPoint> {
        if coords.len() != self.dim_morphisms() {
            return Err(Error::DimensionMismatch {
                what: format!("morphism coordinates for {}", self.family_name()),
                expected: self.dim_morphisms(),
                found: coords.len(),
            });
        }
        if !self.morphism_valid_coords_with(coords, tol) {
            return Err(Error::InvalidMorphism {
                detail: format!(
                    "coordinates fail the validity predicate of {}",
                    self.family_name()
                ),
            });
        }
        Ok(MorphismPoint {
            coords: coords.to_vec(),
        })
    }

    pub(crate) fn morphism_unchecked(&self, coords: Vec<f64>) -> MorphismPoint {
        debug_assert_eq!(coords.len(), self.dim_morphisms());
        MorphismPoint { coords }
    }

    // ----- structure maps in ambient charts ----------------------------

    /// Source projection on raw coordinates. Defined on the whole ambient
    /// chart (the formulas extend smoothly past the validity cut), which is
    /// what lets finite differences probe across boundaries.
    pub fn source_chart(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Realization::MatrixMonoid { .. }
            | Realization::AlgebraMonoid { .. }
            | Realization::HalfSpaceAdd { .. }
            | Realization::HalfLineMul => Vec::new(),
            Realization::TrivialCategory { dim_x, .. } => g[g.len() - dim_x..].to_vec(),
            Realization::OrderCategory => vec![g[1]],
            Realization::EntropyCategory { n } => g[*n..].to_vec(),
            Realization::ActionCategory { monoid, .. } => g[monoid.dim_morphisms()..].to_vec(),
        }
    }

    /// Target projection on raw coordinates (ambient, like `source_chart`).
    pub fn target_chart(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Realization::MatrixMonoid { .. }
            | Realization::AlgebraMonoid { .. }
            | Realization::HalfSpaceAdd { .. }
            | Realization::HalfLineMul => Vec::new(),
            Realization::TrivialCategory { dim_x, .. } => g[..*dim_x].to_vec(),
            Realization::OrderCategory => vec![g[0]],
            Realization::EntropyCategory { n } => g[..*n].to_vec(),
            Realization::ActionCategory { monoid, action, dim_x } => {
                let dm = monoid.dim_morphisms();
                action.apply(&g[..dm], &g[dm..dm + dim_x])
            }
        }
    }

    /// Unit morphism over raw object coordinates.
    pub fn unit_chart(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Realization::MatrixMonoid { n } => {
                let mut e = vec![0.0; n * n];
                for i in 0..*n {
                    e[i * n + i] = 1.0;
                }
                e
            }
            Realization::AlgebraMonoid { algebra } => algebra.unit().to_vec(),
            Realization::HalfSpaceAdd { n } => vec![0.0; *n],
            Realization::HalfLineMul => vec![1.0],
            Realization::TrivialCategory { inner, .. } => {
                let mut out = x.to_vec();
                out.extend(inner.unit_chart(&[]));
                out.extend_from_slice(x);
                out
            }
            Realization::OrderCategory => vec![x[0], x[0]],
            Realization::EntropyCategory { .. } => {
                let mut out = x.to_vec();
                out.extend_from_slice(x);
                out
            }
            Realization::ActionCategory { monoid, .. } => {
                let mut out = monoid.unit_chart(&[]);
                out.extend_from_slice(x);
                out
            }
        }
    }

    /// Composition formula on raw coordinates (`g` after `h`), extended to
    /// the ambient chart; no composability or validity checks here.
    pub fn compose_chart(&self, g: &[f64], h: &[f64]) -> Vec<f64> {
        match self {
            Realization::MatrixMonoid { n } => {
                let n = *n;
                let mut out = vec![0.0; n * n];
                for i in 0..n {
                    for k in 0..n {
                        let a = g[i * n + k];
                        if a == 0.0 {
                            continue;
                        }
                        for j in 0..n {
                            out[i * n + j] += a * h[k * n + j];
                        }
                    }
                }
                out
            }
            Realization::AlgebraMonoid { algebra } => algebra.product(g, h),
            Realization::HalfSpaceAdd { .. } => g.iter().zip(h).map(|(a, b)| a + b).collect(),
            Realization::HalfLineMul => vec![g[0] * h[0]],
            Realization::TrivialCategory { dim_x, inner } => {
                let dm = inner.dim_morphisms();
                let mut out = g[..*dim_x].to_vec();
                out.extend(inner.compose_chart(&g[*dim_x..dim_x + dm], &h[*dim_x..dim_x + dm]));
                out.extend_from_slice(&h[dim_x + dm..]);
                out
            }
            Realization::OrderCategory => vec![g[0], h[1]],
            Realization::EntropyCategory { n } => {
                let mut out = g[..*n].to_vec();
                out.extend_from_slice(&h[*n..]);
                out
            }
            Realization::ActionCategory { monoid, dim_x, .. } => {
                let dm = monoid.dim_morphisms();
                let mut out = monoid.compose_chart(&g[..dm], &h[..dm]);
                out.extend_from_slice(&h[dm..dm + dim_x]);
                out
            }
        }
    }

    // ----- validated structure maps ------------------------------------

    /// Source object of a morphism.
    pub fn source(&self, g: &MorphismPoint) -> Result<ObjectPoint> {
        self.check_morphism_len(g)?;
        Ok(ObjectPoint {
            coords: self.source_chart(g.coords()),
        })
    }

    /// Target object of a morphism.
    pub fn target(&self, g: &MorphismPoint) -> Result<ObjectPoint> {
        self.check_morphism_len(g)?;
        Ok(ObjectPoint {
            coords: self.target_chart(g.coords()),
        })
    }

    /// Unit morphism at an object. The unit of a valid object is always a
    /// valid morphism (for the entropy category it sits on the boundary of
    /// the feasibility cone, `delta S = 0`).
    pub fn unit(&self, x: &ObjectPoint) -> Result<MorphismPoint> {
        if x.coords().len() != self.dim_objects() {
            return Err(Error::DimensionMismatch {
                what: format!("object coordinates for {}", self.family_name()),
                expected: self.dim_objects(),
                found: x.coords().len(),
            });
        }
        Ok(self.morphism_unchecked(self.unit_chart(x.coords())))
    }

    /// True iff `source(g)` matches `target(h)` within
    /// [`COMPOSABILITY_TOL`] in the infinity norm (monoids always compose).
    pub fn is_composable(&self, g: &MorphismPoint, h: &MorphismPoint) -> Result<bool> {
        self.check_morphism_len(g)?;
        self.check_morphism_len(h)?;
        Ok(self.composability_mismatch(g, h) <= COMPOSABILITY_TOL)
    }

    fn composability_mismatch(&self, g: &MorphismPoint, h: &MorphismPoint) -> f64 {
        let s = self.source_chart(g.coords());
        let t = self.target_chart(h.coords());
        s.iter()
            .zip(&t)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Composite `g . h` ("g after h").
    ///
    /// Errors with [`Error::NotComposable`] on a source/target mismatch and
    /// with [`Error::InvalidResult`] if the composite fails the validity
    /// predicate — for `ActionCategory` the latter is a genuine run-time
    /// assertion (regularity of the composite is a theorem, but here it is
    /// decided numerically at tolerance).
    pub fn compose(&self, g: &MorphismPoint, h: &MorphismPoint) -> Result<MorphismPoint> {
        self.compose_with(g, h, &ToleranceConfig::default())
    }

    /// [`Self::compose`] with the composite's validity decided at `tol`.
    pub fn compose_with(
        &self,
        g: &MorphismPoint,
        h: &MorphismPoint,
        tol: &ToleranceConfig,
    ) -> Result<MorphismPoint> {
        self.check_morphism_len(g)?;
        self.check_morphism_len(h)?;
        let mismatch = self.composability_mismatch(g, h);
        if mismatch > COMPOSABILITY_TOL {
            return Err(Error::NotComposable { mismatch });
        }
        let out = self.compose_chart(g.coords(), h.coords());
        if !self.morphism_valid_coords_with(&out, tol) {
            return Err(Error::InvalidResult {
                detail: format!(
                    "composite fails the validity predicate of {}",
                    self.family_name()
                ),
            });
        }
        Ok(self.morphism_unchecked(out))
    }

    fn check_morphism_len(&self, g: &MorphismPoint) -> Result<()> {
        if g.coords().len() != self.dim_morphisms() {
            return Err(Error::DimensionMismatch {
                what: format!("morphism coordinates for {}", self.family_name()),
                expected: self.dim_morphisms(),
                found: g.coords().len(),
            });
        }
        Ok(())
    }

    // ----- fibre frames and translation differentials -------------------

    /// Orthonormal basis of `ker dt` at an arbitrary morphism point, as
    /// matrix columns: the tangent space of the target fibre through that
    /// point. For monoids this is the identity frame on the whole chart.
    pub fn ker_dt_basis_at(&self, g: &[f64], tol: &ToleranceConfig) -> Result<DenseMatrix> {
        if self.is_monoid() {
            return Ok(DenseMatrix::identity(self.dim_morphisms()));
        }
        let jac = fd_jacobian(|y| Some(self.target_chart(y)), g, tol)?;
        let basis = nullspace_basis(&jac, tol)?;
        if basis.cols() != self.delta() {
            return Err(Error::InvalidResult {
                detail: format!(
                    "target fibre frame has {} directions, expected {} (target map degenerate at tolerance)",
                    basis.cols(),
                    self.delta()
                ),
            });
        }
        Ok(basis)
    }

    /// Orthonormal basis of `ker ds` at an arbitrary morphism point (the
    /// tangent space of the source fibre).
    pub fn ker_ds_basis_at(&self, g: &[f64], tol: &ToleranceConfig) -> Result<DenseMatrix> {
        if self.is_monoid() {
            return Ok(DenseMatrix::identity(self.dim_morphisms()));
        }
        let jac = fd_jacobian(|y| Some(self.source_chart(y)), g, tol)?;
        let basis = nullspace_basis(&jac, tol)?;
        if basis.cols() != self.delta() {
            return Err(Error::InvalidResult {
                detail: format!(
                    "source fibre frame has {} directions, expected {} (source map degenerate at tolerance)",
                    basis.cols(),
                    self.delta()
                ),
            });
        }
        Ok(basis)
    }

    /// Frame of `ker dt` at the unit over `x` — the fibre of the tangent
    /// structure from which left translations are measured.
    pub fn ker_dt_basis_at_unit(&self, x: &ObjectPoint, tol: &ToleranceConfig) -> Result<DenseMatrix> {
        self.ker_dt_basis_at(&self.unit_chart(x.coords()), tol)
    }

    /// Frame of `ker ds` at the unit over `x`.
    pub fn ker_ds_basis_at_unit(&self, x: &ObjectPoint, tol: &ToleranceConfig) -> Result<DenseMatrix> {
        self.ker_ds_basis_at(&self.unit_chart(x.coords()), tol)
    }

    /// Differential of the left translation `h |-> g . h` at the point
    /// `at` (morphism coordinates). Exact for the linear monoid families
    /// (matrix and algebra), finite differences otherwise.
    pub fn left_translation_jacobian(
        &self,
        g: &[f64],
        at: &[f64],
        tol: &ToleranceConfig,
    ) -> Result<DenseMatrix> {
        match self {
            Realization::MatrixMonoid { n } => {
                let n = *n;
                let mut jac = DenseMatrix::zeros(n * n, n * n);
                // (g h)_{ij} depends on h_{kj} with weight g_{ik}.
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            jac.set(i * n + j, k * n + j, g[i * n + k]);
                        }
                    }
                }
                Ok(jac)
            }
            Realization::AlgebraMonoid { algebra } => Ok(algebra.left_mult_matrix(g)),
            _ => fd_jacobian(|h| Some(self.compose_chart(g, h)), at, tol),
        }
    }

    /// Differential of the right translation `h |-> h . g` at `at`.
    pub fn right_translation_jacobian(
        &self,
        g: &[f64],
        at: &[f64],
        tol: &ToleranceConfig,
    ) -> Result<DenseMatrix> {
        match self {
            Realization::MatrixMonoid { n } => {
                let n = *n;
                let mut jac = DenseMatrix::zeros(n * n, n * n);
                // (h g)_{ij} depends on h_{ik} with weight g_{kj}.
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            jac.set(i * n + j, i * n + k, g[k * n + j]);
                        }
                    }
                }
                Ok(jac)
            }
            Realization::AlgebraMonoid { algebra } => Ok(algebra.right_mult_matrix(g)),
            _ => fd_jacobian(|h| Some(self.compose_chart(h, g)), at, tol),
        }
    }

    // ----- action regularity --------------------------------------------

    /// Decide whether the action map is submersive at `(g, x)`: the
    /// numerical rank of its Jacobian in all variables must equal `dim X`.
    /// Only meaningful for `ActionCategory`.
    pub fn action_is_regular(
        &self,
        g_monoid: &[f64],
        x: &[f64],
        tol: &ToleranceConfig,
    ) -> Result<bool> {
        match self {
            Realization::ActionCategory { monoid, dim_x, .. } => {
                if g_monoid.len() != monoid.dim_morphisms() {
                    return Err(Error::DimensionMismatch {
                        what: "acting monoid element".into(),
                        expected: monoid.dim_morphisms(),
                        found: g_monoid.len(),
                    });
                }
                if x.len() != *dim_x {
                    return Err(Error::DimensionMismatch {
                        what: "action base point".into(),
                        expected: *dim_x,
                        found: x.len(),
                    });
                }
                self.action_regular_coords(g_monoid, x, tol)
            }
            _ => Err(Error::UnsupportedFamily {
                op: "action_is_regular",
                family: self.family_name().into(),
            }),
        }
    }

    fn action_regular_coords(&self, g: &[f64], x: &[f64], tol: &ToleranceConfig) -> Result<bool> {
        let (action, dim_x) = match self {
            Realization::ActionCategory { action, dim_x, .. } => (action, *dim_x),
            _ => unreachable!("only called on action categories"),
        };
        let mut joint = g.to_vec();
        joint.extend_from_slice(x);
        let gl = g.len();
        let jac = fd_jacobian(
            |y| Some(action.apply(&y[..gl], &y[gl..])),
            &joint,
            tol,
        )?;
        Ok(numerical_rank(&jac, tol)? == dim_x)
    }

    // ----- samplers ------------------------------------------------------

    /// Draw a random valid morphism (scale of order one around the units).
    pub fn sample_morphism<R: Rng>(&self, rng: &mut R) -> MorphismPoint {
        match self {
            Realization::MatrixMonoid { .. } | Realization::AlgebraMonoid { .. } => {
                let coords = gauss_vec(self.dim_morphisms(), 1.0, rng);
                self.morphism_unchecked(coords)
            }
            Realization::HalfSpaceAdd { n } => {
                let mut coords = gauss_vec(*n, 1.0, rng);
                let last = coords[*n - 1];
                coords[*n - 1] = last.abs();
                self.morphism_unchecked(coords)
            }
            Realization::HalfLineMul => {
                let v: f64 = rng.sample(StandardNormal);
                self.morphism_unchecked(vec![v.abs()])
            }
            Realization::TrivialCategory { dim_x, inner } => {
                let mut coords = gauss_vec(*dim_x, 1.0, rng);
                coords.extend(inner.sample_morphism(rng).coords);
                coords.extend(gauss_vec(*dim_x, 1.0, rng));
                self.morphism_unchecked(coords)
            }
            Realization::OrderCategory => {
                let x: f64 = rng.sample(StandardNormal);
                let gap: f64 = rng.sample::<f64, _>(StandardNormal).abs();
                self.morphism_unchecked(vec![x + gap, x])
            }
            Realization::EntropyCategory { n } => {
                // Source anywhere; target pulled toward uniform, which can
                // only raise entropy (concavity), so the pair is feasible.
                let p = sample_state_chart(*n, rng);
                let q = pull_toward_uniform(&p, rng.gen_range(0.05..0.95), *n);
                let mut coords = q;
                coords.extend(p);
                self.morphism_unchecked(coords)
            }
            Realization::ActionCategory { monoid, dim_x, .. } => loop {
                let mut coords = monoid.sample_morphism(rng).coords;
                coords.extend(gauss_vec(*dim_x, 1.0, rng));
                if self.morphism_valid_coords(&coords) {
                    return self.morphism_unchecked(coords);
                }
            },
        }
    }

    /// Draw a composable pair `(g, h)` with `source(g) = target(h)`
    /// bit-exactly.
    pub fn sample_composable_pair<R: Rng>(&self, rng: &mut R) -> (MorphismPoint, MorphismPoint) {
        match self {
            Realization::OrderCategory => {
                let h = self.sample_morphism(rng);
                let y = h.coords()[0];
                let gap: f64 = rng.sample::<f64, _>(StandardNormal).abs();
                (self.morphism_unchecked(vec![y + gap, y]), h)
            }
            Realization::EntropyCategory { n } => {
                let h = self.sample_morphism(rng);
                let q = h.coords()[..*n].to_vec();
                let r = pull_toward_uniform(&q, rng.gen_range(0.05..0.95), *n);
                let mut g = r;
                g.extend_from_slice(&q);
                (self.morphism_unchecked(g), h)
            }
            Realization::TrivialCategory { dim_x, inner } => {
                let h = self.sample_morphism(rng);
                let mut g = gauss_vec(*dim_x, 1.0, rng);
                g.extend(inner.sample_morphism(rng).coords);
                g.extend_from_slice(&h.coords()[..*dim_x]);
                (self.morphism_unchecked(g), h)
            }
            Realization::ActionCategory { monoid, dim_x, .. } => loop {
                let h = self.sample_morphism(rng);
                let y = self.target_chart(h.coords());
                debug_assert_eq!(y.len(), *dim_x);
                let mut g = monoid.sample_morphism(rng).coords;
                g.extend(y);
                if self.morphism_valid_coords(&g) {
                    if let Ok(composite) = self.compose(
                        &self.morphism_unchecked(g.clone()),
                        &h,
                    ) {
                        let _ = composite;
                        return (self.morphism_unchecked(g), h);
                    }
                }
            },
            // Monoids: any two morphisms compose.
            _ => (self.sample_morphism(rng), self.sample_morphism(rng)),
        }
    }

    /// Draw a point of the target fibre `t^{-1}(x)` near the unit over `x`
    /// (used to probe rank constancy of left translations along their actual
    /// domain). Errors with [`Error::SamplerUnavailable`] where the fibre has
    /// no parametrized sampler (`ActionCategory`, whose target fibres are
    /// curved level sets).
    pub fn sample_t_fibre_near_unit<R: Rng>(
        &self,
        x: &ObjectPoint,
        rng: &mut R,
    ) -> Result<MorphismPoint> {
        const SPREAD: f64 = 0.1;
        match self {
            Realization::MatrixMonoid { .. }
            | Realization::AlgebraMonoid { .. }
            | Realization::HalfSpaceAdd { .. }
            | Realization::HalfLineMul => {
                let unit = self.unit_chart(&[]);
                loop {
                    let mut coords = unit.clone();
                    for c in coords.iter_mut() {
                        *c += SPREAD * rng.sample::<f64, _>(StandardNormal);
                    }
                    if self.morphism_valid_coords(&coords) {
                        return Ok(self.morphism_unchecked(coords));
                    }
                }
            }
            Realization::TrivialCategory { dim_x: _, inner } => {
                // Fibre over x: first block pinned to x, rest free.
                let inner_pt = inner.sample_t_fibre_near_unit(
                    &ObjectPoint { coords: Vec::new() },
                    rng,
                )?;
                let mut coords = x.coords().to_vec();
                coords.extend(inner_pt.coords);
                coords.extend(
                    x.coords()
                        .iter()
                        .map(|v| v + SPREAD * rng.sample::<f64, _>(StandardNormal)),
                );
                Ok(self.morphism_unchecked(coords))
            }
            Realization::OrderCategory => {
                let xv = x.coords()[0];
                let drop: f64 = rng.sample::<f64, _>(StandardNormal).abs() * SPREAD;
                Ok(self.morphism_unchecked(vec![xv, xv - drop]))
            }
            Realization::EntropyCategory { n } => {
                // Morphisms (x, w) with w a nearby lower-entropy state: push
                // the source away from uniform, which can only lower entropy
                // along the ray (concavity again, run backward).
                let sx = entropy_of_chart(x.coords());
                for _ in 0..200 {
                    let mut w = x.coords().to_vec();
                    let dir = gauss_vec(*n, 1.0, rng);
                    let step = 0.02 * rng.gen_range(0.1..1.0);
                    for (wi, di) in w.iter_mut().zip(&dir) {
                        *wi += step * di;
                    }
                    if !self.object_valid_coords(&w) {
                        continue;
                    }
                    if entropy_of_chart(&w) <= sx {
                        let mut coords = x.coords().to_vec();
                        coords.extend(w);
                        return Ok(self.morphism_unchecked(coords));
                    }
                }
                Err(Error::InvalidResult {
                    detail: "could not find a lower-entropy state near this object".into(),
                })
            }
            Realization::ActionCategory { .. } => Err(Error::SamplerUnavailable {
                family: self.family_name().into(),
            }),
        }
    }

    /// Draw a point of the source fibre `s^{-1}(x)` near the unit over `x`
    /// (the dual probe, for right translations).
    pub fn sample_s_fibre_near_unit<R: Rng>(
        &self,
        x: &ObjectPoint,
        rng: &mut R,
    ) -> Result<MorphismPoint> {
        const SPREAD: f64 = 0.1;
        match self {
            Realization::TrivialCategory { dim_x: _, inner } => {
                let inner_pt =
                    inner.sample_s_fibre_near_unit(&ObjectPoint { coords: Vec::new() }, rng)?;
                let mut coords: Vec<f64> = x
                    .coords()
                    .iter()
                    .map(|v| v + SPREAD * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                coords.extend(inner_pt.coords);
                coords.extend_from_slice(x.coords());
                Ok(self.morphism_unchecked(coords))
            }
            Realization::OrderCategory => {
                let xv = x.coords()[0];
                let rise: f64 = rng.sample::<f64, _>(StandardNormal).abs() * SPREAD;
                Ok(self.morphism_unchecked(vec![xv + rise, xv]))
            }
            Realization::EntropyCategory { n } => {
                // Morphisms (r, x) with r a nearby higher-entropy state:
                // mix a pull toward uniform with a small transverse jitter.
                let sx = entropy_of_chart(x.coords());
                for _ in 0..200 {
                    let theta = rng.gen_range(0.01..0.1);
                    let mut r = pull_toward_uniform(x.coords(), theta, *n);
                    let jitter = gauss_vec(*n, 0.003, rng);
                    for (ri, ji) in r.iter_mut().zip(&jitter) {
                        *ri += ji;
                    }
                    if !self.object_valid_coords(&r) || entropy_of_chart(&r) < sx {
                        continue;
                    }
                    let mut coords = r;
                    coords.extend_from_slice(x.coords());
                    return Ok(self.morphism_unchecked(coords));
                }
                Err(Error::InvalidResult {
                    detail: "could not find a higher-entropy state near this object".into(),
                })
            }
            Realization::ActionCategory { .. } => Err(Error::SamplerUnavailable {
                family: self.family_name().into(),
            }),
            // Monoids: the source fibre is the whole chart.
            _ => self.sample_t_fibre_near_unit(x, rng),
        }
    }

    /// Draw a valid morphism within `radius` (infinity norm) of `g`,
    /// restricted to the stratum that carries the units when those lie on a
    /// boundary: the diagonal for the order category, the zero-entropy-change
    /// level set for the entropy category, the boundary hyperplane for the
    /// additive half-space. Openness of the invertibles is a statement
    /// *within* that stratum, so this is the neighbourhood a core probe must
    /// explore.
    pub fn sample_near<R: Rng>(
        &self,
        g: &MorphismPoint,
        radius: f64,
        rng: &mut R,
    ) -> Result<MorphismPoint> {
        self.check_morphism_len(g)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::NonFinite {
                what: "probe radius".into(),
            });
        }
        let gc = g.coords();
        match self {
            Realization::MatrixMonoid { .. } | Realization::AlgebraMonoid { .. } => {
                let coords = gc
                    .iter()
                    .map(|v| v + rng.gen_range(-radius..radius))
                    .collect();
                Ok(self.morphism_unchecked(coords))
            }
            Realization::HalfSpaceAdd { n } => {
                // Units live on the boundary hyperplane; stay on it.
                let mut coords: Vec<f64> = gc
                    .iter()
                    .map(|v| v + rng.gen_range(-radius..radius))
                    .collect();
                coords[*n - 1] = gc[*n - 1];
                Ok(self.morphism_unchecked(coords))
            }
            Realization::HalfLineMul => loop {
                let c = gc[0] + rng.gen_range(-radius..radius);
                if c >= 0.0 {
                    return Ok(self.morphism_unchecked(vec![c]));
                }
            },
            Realization::TrivialCategory { dim_x, inner } => {
                let dm = inner.dim_morphisms();
                let inner_near = inner.sample_near(
                    &inner.morphism_unchecked(gc[*dim_x..dim_x + dm].to_vec()),
                    radius,
                    rng,
                )?;
                let mut coords: Vec<f64> = gc[..*dim_x]
                    .iter()
                    .map(|v| v + rng.gen_range(-radius..radius))
                    .collect();
                coords.extend(inner_near.coords);
                coords.extend(
                    gc[dim_x + dm..]
                        .iter()
                        .map(|v| v + rng.gen_range(-radius..radius)),
                );
                Ok(self.morphism_unchecked(coords))
            }
            Realization::OrderCategory => {
                if gc[0] == gc[1] {
                    // Diagonal stratum.
                    let x = gc[1] + rng.gen_range(-radius..radius);
                    Ok(self.morphism_unchecked(vec![x, x]))
                } else {
                    loop {
                        let y = gc[0] + rng.gen_range(-radius..radius);
                        let x = gc[1] + rng.gen_range(-radius..radius);
                        if x <= y {
                            return Ok(self.morphism_unchecked(vec![y, x]));
                        }
                    }
                }
            }
            Realization::EntropyCategory { n } => {
                let q = &gc[..*n];
                let p = &gc[*n..];
                let dq = entropy_of_chart(q) - entropy_of_chart(p);
                if dq.abs() <= thermo::STATE_MARGIN {
                    self.sample_on_entropy_level_set(q, p, radius, rng)
                } else {
                    // Interior of the feasibility cone: free jitter with
                    // rejection.
                    for _ in 0..500 {
                        let coords: Vec<f64> = gc
                            .iter()
                            .map(|v| v + rng.gen_range(-radius..radius))
                            .collect();
                        if self.morphism_valid_coords(&coords) {
                            return Ok(self.morphism_unchecked(coords));
                        }
                    }
                    Err(Error::InvalidResult {
                        detail: "no valid morphism found in the probe ball".into(),
                    })
                }
            }
            Realization::ActionCategory { .. } => {
                for _ in 0..500 {
                    let coords: Vec<f64> = gc
                        .iter()
                        .map(|v| v + rng.gen_range(-radius..radius))
                        .collect();
                    if self.morphism_valid_coords(&coords) {
                        return Ok(self.morphism_unchecked(coords));
                    }
                }
                Err(Error::InvalidResult {
                    detail: "no valid morphism found in the probe ball".into(),
                })
            }
        }
    }

    /// Level-set sampler for the entropy category: nearby pairs `(q', p')`
    /// with `S(q') = S(p')` to machine precision, found by a tangential step
    /// followed by a one-dimensional Newton correction along the entropy
    /// gradient.
    fn sample_on_entropy_level_set<R: Rng>(
        &self,
        q: &[f64],
        p: &[f64],
        radius: f64,
        rng: &mut R,
    ) -> Result<MorphismPoint> {
        let n = q.len();
        'draw: for _ in 0..200 {
            // Perturb the source within a third of the radius.
            let mut p_new = p.to_vec();
            for v in p_new.iter_mut() {
                *v += rng.gen_range(-radius / 3.0..radius / 3.0);
            }
            if !self.object_valid_coords(&p_new) {
                continue;
            }
            let target_entropy = entropy_of_chart(&p_new);

            // Tangential step at q, then Newton back onto the level set.
            let grad = chart_entropy_gradient(q);
            let grad_norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            if grad_norm < 1e-9 {
                continue; // too close to uniform for a well-posed correction
            }
            let dir: Vec<f64> = grad.iter().map(|v| v / grad_norm).collect();
            let step = gauss_vec(n, radius / 4.0, rng);
            let dot: f64 = step.iter().zip(&dir).map(|(a, b)| a * b).sum();
            let mut q_new: Vec<f64> = (0..n).map(|i| q[i] + step[i] - dot * dir[i]).collect();
            if !self.object_valid_coords(&q_new) {
                continue;
            }
            for _ in 0..60 {
                let f = entropy_of_chart(&q_new) - target_entropy;
                if f.abs() <= 1e-13 {
                    break;
                }
                let gq = chart_entropy_gradient(&q_new);
                let slope: f64 = gq.iter().zip(&dir).map(|(a, b)| a * b).sum();
                if slope.abs() < 1e-12 {
                    continue 'draw;
                }
                for i in 0..n {
                    q_new[i] -= f / slope * dir[i];
                }
                if !self.object_valid_coords(&q_new) {
                    continue 'draw;
                }
            }
            if (entropy_of_chart(&q_new) - target_entropy).abs() > 1e-12 {
                continue;
            }
            let within = q_new
                .iter()
                .zip(q)
                .chain(p_new.iter().zip(p))
                .all(|(a, b)| (a - b).abs() <= radius);
            if !within {
                continue;
            }
            let mut coords = q_new;
            coords.extend(p_new);
            if self.morphism_valid_coords(&coords) {
                return Ok(self.morphism_unchecked(coords));
            }
        }
        Err(Error::InvalidResult {
            detail: "level-set sampler failed to converge near this morphism".into(),
        })
    }
}

/// Entropy of a chart point `(p_1, ..., p_n)` of the state simplex,
/// reconstructing `p_0`. Ambient-total: returns `-inf`-free garbage only for
/// points far outside, which the validity predicates filter.
pub(crate) fn entropy_of_chart(chart: &[f64]) -> f64 {
    let p0 = 1.0 - chart.iter().sum::<f64>();
    let mut s = if p0 > 0.0 { -p0 * p0.ln() } else { 0.0 };
    for &p in chart {
        if p > 0.0 {
            s -= p * p.ln();
        }
    }
    s
}

/// Chart-coordinate entropy gradient `-(ln p_i - ln p_0)` without
/// validation (interior points only).
fn chart_entropy_gradient(chart: &[f64]) -> Vec<f64> {
    let p0 = 1.0 - chart.iter().sum::<f64>();
    let l0 = p0.ln();
    chart.iter().map(|&pi| -(pi.ln() - l0)).collect()
}

/// Pull a chart state toward the uniform state by `theta` in `[0, 1)`;
/// concavity of the entropy guarantees the entropy does not drop.
fn pull_toward_uniform(chart: &[f64], theta: f64, n: usize) -> Vec<f64> {
    let u = 1.0 / (n + 1) as f64;
    chart.iter().map(|&c| c + theta * (u - c)).collect()
}

/// Random interior, non-uniform chart state: exponential weights normalized
/// to the simplex (uniform by symmetry), redrawn until admissible.
fn sample_state_chart<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n + 1)
            .map(|_| -rng.gen_range(1e-12..1.0_f64).ln())
            .collect();
        let sum: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|v| v / sum).collect();
        if let Ok(c) = thermo::Configuration::new(probs) {
            if thermo::is_valid_state(&c) {
                return c.chart();
            }
        }
    }
}

fn gauss_vec<R: Rng>(len: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..len)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn matrix_monoid_composes_by_product() {
        let m = Realization::matrix_monoid(2).unwrap();
        let g = m.morphism(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let h = m.morphism(&[0.0, 1.0, 1.0, 0.0]).unwrap();
        let gh = m.compose(&g, &h).unwrap();
        assert_eq!(gh.coords(), &[2.0, 1.0, 4.0, 3.0]);
        assert!(m.is_composable(&g, &h).unwrap());
    }

    #[test]
    fn matrix_monoid_unit_laws() {
        let m = Realization::matrix_monoid(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = m.sample_morphism(&mut rng);
            let e = m.unit(&m.unique_object().unwrap()).unwrap();
            let left = m.compose(&e, &g).unwrap();
            let right = m.compose(&g, &e).unwrap();
            for ((a, b), c) in left.coords().iter().zip(right.coords()).zip(g.coords()) {
                assert!((a - c).abs() <= UNIT_LAW_TOL);
                assert!((b - c).abs() <= UNIT_LAW_TOL);
            }
        }
    }

    #[test]
    fn order_category_structure() {
        let c = Realization::order_category();
        let g = c.morphism(&[3.0, 1.0]).unwrap();
        assert_eq!(c.source(&g).unwrap().coords(), &[1.0]);
        assert_eq!(c.target(&g).unwrap().coords(), &[3.0]);
        let x = c.object(&[2.0]).unwrap();
        assert_eq!(c.unit(&x).unwrap().coords(), &[2.0, 2.0]);
        let a = c.morphism(&[3.0, 2.0]).unwrap();
        let b = c.morphism(&[2.0, 1.0]).unwrap();
        assert_eq!(c.compose(&a, &b).unwrap().coords(), &[3.0, 1.0]);
    }

    #[test]
    fn order_category_rejects_backward_pairs() {
        let c = Realization::order_category();
        assert_eq!(
            c.morphism(&[1.0, 3.0]).unwrap_err().kind(),
            "InvalidMorphism"
        );
    }

    #[test]
    fn order_category_composability_tolerance() {
        let c = Realization::order_category();
        let g = c.morphism(&[3.0, 2.0 + 5e-10]).unwrap();
        let h = c.morphism(&[2.0, 1.0]).unwrap();
        assert!(c.is_composable(&g, &h).unwrap());
        let g_far = c.morphism(&[3.0, 2.0 + 1e-7]).unwrap();
        assert!(!c.is_composable(&g_far, &h).unwrap());
        assert_eq!(c.compose(&g_far, &h).unwrap_err().kind(), "NotComposable");
    }

    #[test]
    fn trivial_category_threads_the_base() {
        let inner = Realization::matrix_monoid(1).unwrap();
        let c = Realization::trivial_category(1, inner).unwrap();
        assert_eq!(c.dim_morphisms(), 3);
        assert_eq!(c.dim_objects(), 1);
        let g = c.morphism(&[5.0, 2.0, 3.0]).unwrap(); // (z, g, y)
        let h = c.morphism(&[3.0, 4.0, 1.0]).unwrap(); // (y, h, x)
        let gh = c.compose(&g, &h).unwrap();
        assert_eq!(gh.coords(), &[5.0, 8.0, 1.0]);
        assert_eq!(c.source(&g).unwrap().coords(), &[3.0]);
        assert_eq!(c.target(&g).unwrap().coords(), &[5.0]);
    }

    #[test]
    fn entropy_category_accepts_feasible_rejects_infeasible() {
        let c = Realization::entropy_category(1).unwrap();
        // Chart coordinate is p_1; (q, p) = (0.4, 0.1): S(0.6,0.4) > S(0.9,0.1).
        assert!(c.morphism(&[0.4, 0.1]).is_ok());
        assert_eq!(
            c.morphism(&[0.1, 0.4]).unwrap_err().kind(),
            "InvalidMorphism"
        );
    }

    #[test]
    fn entropy_category_composition_is_transitive_feasibility() {
        let c = Realization::entropy_category(1).unwrap();
        let g = c.morphism(&[0.45, 0.4]).unwrap();
        let h = c.morphism(&[0.4, 0.1]).unwrap();
        let gh = c.compose(&g, &h).unwrap();
        assert_eq!(gh.coords(), &[0.45, 0.1]);
    }

    #[test]
    fn entropy_category_rejects_uniform_endpoints() {
        let c = Realization::entropy_category(1).unwrap();
        assert_eq!(c.object(&[0.5]).unwrap_err().kind(), "InvalidObject");
        assert!(c.object(&[0.25]).is_ok());
    }

    #[test]
    fn half_space_units_sit_on_the_boundary() {
        let m = Realization::half_space_add(2).unwrap();
        let e = m.unit(&m.unique_object().unwrap()).unwrap();
        assert_eq!(e.coords(), &[0.0, 0.0]);
        assert!(m.morphism(&[-3.0, 0.5]).is_ok());
        assert_eq!(
            m.morphism(&[1.0, -0.5]).unwrap_err().kind(),
            "InvalidMorphism"
        );
    }

    #[test]
    fn half_line_product_and_unit() {
        let m = Realization::half_line_mul();
        let g = m.morphism(&[3.0]).unwrap();
        let h = m.morphism(&[0.5]).unwrap();
        assert_eq!(m.compose(&g, &h).unwrap().coords(), &[1.5]);
        assert_eq!(
            m.unit(&m.unique_object().unwrap()).unwrap().coords(),
            &[1.0]
        );
    }

    #[test]
    fn algebra_spec_validates_associativity() {
        let alg = AlgebraSpec::upper_triangular_2x2();
        assert_eq!(alg.dim(), 3);
        // Break associativity: make c*c = a (then (cc)b = ab = 0 but c(cb) = cc = a).
        let mut bad = alg.structure().to_vec();
        bad[(2 * 3 + 2) * 3] = 1.0;
        let err = AlgebraSpec::new(3, bad, alg.unit().to_vec()).unwrap_err();
        assert_eq!(err.kind(), "InvalidSpec");
    }

    #[test]
    fn algebra_spec_validates_unit() {
        let alg = AlgebraSpec::upper_triangular_2x2();
        let err = AlgebraSpec::new(3, alg.structure().to_vec(), vec![1.0, 0.0, 0.0]).unwrap_err();
        assert_eq!(err.kind(), "InvalidSpec");
    }

    #[test]
    fn triangular_algebra_products() {
        let alg = AlgebraSpec::upper_triangular_2x2();
        // a*c = c, c*a = 0, c*b = c, b*c = 0.
        assert_eq!(alg.product(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(alg.product(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(alg.product(&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(alg.product(&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn monoid_frames_are_the_identity() {
        let m = Realization::matrix_monoid(2).unwrap();
        let k = m
            .ker_dt_basis_at_unit(&m.unique_object().unwrap(), &tol())
            .unwrap();
        assert_eq!(k, DenseMatrix::identity(4));
    }

    #[test]
    fn order_category_fibre_frame_is_source_direction() {
        let c = Realization::order_category();
        let x = c.object(&[2.0]).unwrap();
        let k = c.ker_dt_basis_at_unit(&x, &tol()).unwrap();
        assert_eq!(k.cols(), 1);
        assert!(k.get(0, 0).abs() < 1e-9);
        assert!((k.get(1, 0).abs() - 1.0).abs() < 1e-9);
        // Source-fibre frame is the target direction.
        let ks = c.ker_ds_basis_at_unit(&x, &tol()).unwrap();
        assert!((ks.get(0, 0).abs() - 1.0).abs() < 1e-9);
        assert!(ks.get(1, 0).abs() < 1e-9);
    }

    #[test]
    fn entropy_category_fibre_frame_spans_source_block() {
        let c = Realization::entropy_category(2).unwrap();
        let x = c.object(&[0.3, 0.2]).unwrap();
        let k = c.ker_dt_basis_at_unit(&x, &tol()).unwrap();
        assert_eq!(k.cols(), 2);
        // Columns must vanish on the target block.
        for j in 0..2 {
            assert!(k.get(0, j).abs() < 1e-9);
            assert!(k.get(1, j).abs() < 1e-9);
        }
    }

    #[test]
    fn translation_jacobian_matches_finite_differences() {
        // Exact Kronecker form vs the generic FD path on the same data.
        let m = Realization::matrix_monoid(2).unwrap();
        let g = [1.0, 2.0, -0.5, 0.3];
        let at = m.unit_chart(&[]);
        let exact = m.left_translation_jacobian(&g, &at, &tol()).unwrap();
        let fd = fd_jacobian(|h| Some(m.compose_chart(&g, h)), &at, &tol()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((exact.get(i, j) - fd.get(i, j)).abs() < 1e-9);
            }
        }
        let exact_r = m.right_translation_jacobian(&g, &at, &tol()).unwrap();
        let fd_r = fd_jacobian(|h| Some(m.compose_chart(h, &g)), &at, &tol()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((exact_r.get(i, j) - fd_r.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn algebra_translation_matrices_match_products() {
        let alg = AlgebraSpec::upper_triangular_2x2();
        let g = [0.7, -0.2, 1.5];
        let l = alg.left_mult_matrix(&g);
        let r = alg.right_mult_matrix(&g);
        let h = [0.3, 0.9, -1.1];
        let lh = l.matvec(&h);
        let rh = r.matvec(&h);
        let gh = alg.product(&g, &h);
        let hg = alg.product(&h, &g);
        for k in 0..3 {
            assert!((lh[k] - gh[k]).abs() < 1e-12);
            assert!((rh[k] - hg[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_action_regularity() {
        let c = Realization::action_category(
            Realization::half_line_mul(),
            ActionKind::Scale,
            1,
        )
        .unwrap();
        // d(gx) = (x, g): rank 1 unless both vanish.
        assert!(c.action_is_regular(&[1.0], &[7.0], &tol()).unwrap());
        assert!(c.action_is_regular(&[0.0], &[7.0], &tol()).unwrap());
        assert!(c.action_is_regular(&[2.0], &[0.0], &tol()).unwrap());
        assert!(!c.action_is_regular(&[0.0], &[0.0], &tol()).unwrap());
        // (0, 0) is therefore not a morphism.
        assert_eq!(
            c.morphism(&[0.0, 0.0]).unwrap_err().kind(),
            "InvalidMorphism"
        );
    }

    #[test]
    fn matrix_apply_action_identity_is_regular_everywhere() {
        let c = Realization::action_category(
            Realization::matrix_monoid(2).unwrap(),
            ActionKind::MatrixApply,
            2,
        )
        .unwrap();
        assert!(c
            .action_is_regular(&[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0], &tol())
            .unwrap());
        // Zero matrix at the origin is singular for the action.
        assert!(!c
            .action_is_regular(&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.0], &tol())
            .unwrap());
    }

    #[test]
    fn action_category_composition_keeps_base_point() {
        let c = Realization::action_category(
            Realization::half_line_mul(),
            ActionKind::Scale,
            1,
        )
        .unwrap();
        let h = c.morphism(&[2.0, 3.0]).unwrap(); // acts at x = 3, lands at 6
        let g = c.morphism(&[0.5, 6.0]).unwrap();
        let gh = c.compose(&g, &h).unwrap();
        assert_eq!(gh.coords(), &[1.0, 3.0]);
        assert_eq!(c.target(&h).unwrap().coords(), &[6.0]);
    }

    #[test]
    fn action_regularity_rejected_on_other_families() {
        let m = Realization::matrix_monoid(2).unwrap();
        assert_eq!(
            m.action_is_regular(&[1.0], &[1.0], &tol()).unwrap_err().kind(),
            "UnsupportedFamily"
        );
    }

    #[test]
    fn samplers_produce_valid_composable_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let families: Vec<Realization> = vec![
            Realization::matrix_monoid(2).unwrap(),
            Realization::algebra_monoid(AlgebraSpec::upper_triangular_2x2()),
            Realization::half_space_add(2).unwrap(),
            Realization::half_line_mul(),
            Realization::order_category(),
            Realization::entropy_category(2).unwrap(),
            Realization::trivial_category(1, Realization::matrix_monoid(1).unwrap()).unwrap(),
            Realization::action_category(Realization::half_line_mul(), ActionKind::Scale, 1)
                .unwrap(),
        ];
        for c in &families {
            for _ in 0..20 {
                let g = c.sample_morphism(&mut rng);
                assert!(
                    c.morphism_valid_coords(g.coords()),
                    "invalid sample in {}",
                    c.family_name()
                );
                let (a, b) = c.sample_composable_pair(&mut rng);
                assert!(c.is_composable(&a, &b).unwrap());
                assert!(c.compose(&a, &b).is_ok(), "composite invalid in {}", c.family_name());
            }
        }
    }

    #[test]
    fn fibre_samplers_stay_in_fibres() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let order = Realization::order_category();
        let x = order.object(&[1.5]).unwrap();
        for _ in 0..10 {
            let m = order.sample_t_fibre_near_unit(&x, &mut rng).unwrap();
            assert_eq!(m.coords()[0], 1.5);
            let m2 = order.sample_s_fibre_near_unit(&x, &mut rng).unwrap();
            assert_eq!(m2.coords()[1], 1.5);
        }
        let ent = Realization::entropy_category(2).unwrap();
        let p = ent.object(&[0.3, 0.2]).unwrap();
        for _ in 0..10 {
            let m = ent.sample_t_fibre_near_unit(&p, &mut rng).unwrap();
            assert_eq!(&m.coords()[..2], p.coords());
            assert!(ent.morphism_valid_coords(m.coords()));
            let m2 = ent.sample_s_fibre_near_unit(&p, &mut rng).unwrap();
            assert_eq!(&m2.coords()[2..], p.coords());
            assert!(ent.morphism_valid_coords(m2.coords()));
        }
    }

    #[test]
    fn action_fibre_sampler_is_unavailable() {
        let c = Realization::action_category(
            Realization::half_line_mul(),
            ActionKind::Scale,
            1,
        )
        .unwrap();
        let x = c.object(&[2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            c.sample_t_fibre_near_unit(&x, &mut rng).unwrap_err().kind(),
            "SamplerUnavailable"
        );
    }

    #[test]
    fn level_set_sampler_hits_machine_precision() {
        let c = Realization::entropy_category(2).unwrap();
        let x = c.object(&[0.3, 0.2]).unwrap();
        let u = c.unit(&x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = c.sample_near(&u, 0.01, &mut rng).unwrap();
            let dq = entropy_of_chart(&m.coords()[..2]) - entropy_of_chart(&m.coords()[2..]);
            assert!(dq.abs() <= 1e-12, "delta S = {dq:e}");
        }
    }

    #[test]
    fn unit_laws_hold_across_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let families: Vec<Realization> = vec![
            Realization::order_category(),
            Realization::entropy_category(2).unwrap(),
            Realization::trivial_category(2, Realization::matrix_monoid(1).unwrap()).unwrap(),
            Realization::half_space_add(1).unwrap(),
        ];
        for c in &families {
            for _ in 0..20 {
                let g = c.sample_morphism(&mut rng);
                let s = c.source(&g).unwrap();
                let t = c.target(&g).unwrap();
                let us = c.unit(&s).unwrap();
                let ut = c.unit(&t).unwrap();
                let right = c.compose(&g, &us).unwrap();
                let left = c.compose(&ut, &g).unwrap();
                for (a, b) in right.coords().iter().zip(g.coords()) {
                    assert!((a - b).abs() <= UNIT_LAW_TOL);
                }
                for (a, b) in left.coords().iter().zip(g.coords()) {
                    assert!((a - b).abs() <= UNIT_LAW_TOL);
                }
            }
        }
    }
}
