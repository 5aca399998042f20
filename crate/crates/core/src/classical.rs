//! Constrained classical mechanics on the hyperboloid: canonical and Dirac
//! brackets, the fifteen conserved generators, and their algebra checks.
//!
//! Phase space is the ambient `(x^1..x^4, p_1..p_4)` with second-class
//! constraints `phi1 = x.x + 1` and `phi2 = x.p`. Brackets are evaluated
//! numerically from exact forward-mode derivatives; nothing about the reduced
//! bracket is hard-coded, so closed forms quoted in reports are read off from
//! the generic engine rather than assumed.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{FourVector, HyperPoint, METRIC_DIAG};
use crate::grad::{PhaseScalar, ScalarArith, PHASE_DIM};

#[derive(Debug, Error, PartialEq)]
pub enum BracketError {
    #[error("square root of a non-positive value ({0:e}) during evaluation")]
    SqrtDomain(f64),
    #[error("constraint matrix is singular at this point (pairing {0:e})")]
    DegenerateConstraints(f64),
    #[error("bracket nesting exceeds the supported derivative depth")]
    NestingTooDeep,
}

/// Expression tree over the eight phase variables.
///
/// Variables 0..4 are the contravariant `x^i`, 4..8 the covariant `p_i`.
/// `Dirac` and `Poisson` nodes make brackets first-class expressions, so
/// brackets of brackets evaluate through nested derivative lifting.
#[derive(Debug)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Sqrt(Arc<Expr>),
    Poisson(Arc<Expr>, Arc<Expr>),
    Dirac(Arc<Expr>, Arc<Expr>),
}

/// Named observable on the constrained phase space.
#[derive(Clone)]
pub struct Observable {
    pub name: String,
    expr: Arc<Expr>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({})", self.name)
    }
}

fn cx(v: f64) -> Arc<Expr> {
    Arc::new(Expr::Const(v))
}

fn var(i: usize) -> Arc<Expr> {
    Arc::new(Expr::Var(i))
}

fn add(a: &Arc<Expr>, b: &Arc<Expr>) -> Arc<Expr> {
    Arc::new(Expr::Add(a.clone(), b.clone()))
}

fn sub(a: &Arc<Expr>, b: &Arc<Expr>) -> Arc<Expr> {
    Arc::new(Expr::Sub(a.clone(), b.clone()))
}

fn mul(a: &Arc<Expr>, b: &Arc<Expr>) -> Arc<Expr> {
    Arc::new(Expr::Mul(a.clone(), b.clone()))
}

fn neg(a: &Arc<Expr>) -> Arc<Expr> {
    Arc::new(Expr::Neg(a.clone()))
}

fn scale(c: f64, a: &Arc<Expr>) -> Arc<Expr> {
    if c == 1.0 {
        a.clone()
    } else if c == -1.0 {
        neg(a)
    } else {
        mul(&cx(c), a)
    }
}

/// Sum of a list of expressions (zero constant if empty).
fn total(terms: Vec<Arc<Expr>>) -> Arc<Expr> {
    let mut it = terms.into_iter();
    let first = it.next().unwrap_or_else(|| cx(0.0));
    it.fold(first, |acc, t| add(&acc, &t))
}

impl Observable {
    pub fn from_expr(name: impl Into<String>, expr: Arc<Expr>) -> Observable {
        Observable {
            name: name.into(),
            expr,
        }
    }

    /// Coordinate function `x^i` (1-based ambient index).
    pub fn x_upper(i: usize) -> Observable {
        assert!((1..=4).contains(&i));
        Observable::from_expr(format!("x^{i}"), var(i - 1))
    }

    /// Momentum function `p_i` (1-based ambient index, covariant).
    pub fn p_lower(i: usize) -> Observable {
        assert!((1..=4).contains(&i));
        Observable::from_expr(format!("p_{i}"), var(3 + i))
    }

    pub fn constant(c: f64) -> Observable {
        Observable::from_expr(format!("{c}"), cx(c))
    }

    pub fn eval(&self, pt: &PhasePoint) -> Result<f64, BracketError> {
        eval_expr::<f64>(&self.expr, &pt.vars())
    }

    /// Gradient with respect to the eight phase variables.
    pub fn gradient(&self, pt: &PhasePoint) -> Result<[f64; PHASE_DIM], BracketError> {
        let vars = pt.vars();
        let seeds: [crate::grad::Grad8<f64>; PHASE_DIM] =
            std::array::from_fn(|i| vars[i].lift_seed(i));
        let g = eval_expr(&self.expr, &seeds)?;
        Ok(f64::unlift(g).1)
    }

    /// Dirac bracket `{self, other}` as a new observable.
    pub fn dirac_with(&self, other: &Observable) -> Observable {
        Observable::from_expr(
            format!("{{{}, {}}}", self.name, other.name),
            Arc::new(Expr::Dirac(self.expr.clone(), other.expr.clone())),
        )
    }

    /// Canonical Poisson bracket `{self, other}` as a new observable.
    pub fn poisson_with(&self, other: &Observable) -> Observable {
        Observable::from_expr(
            format!("{{{}, {}}}_P", self.name, other.name),
            Arc::new(Expr::Poisson(self.expr.clone(), other.expr.clone())),
        )
    }

    pub fn add_obs(&self, other: &Observable) -> Observable {
        Observable::from_expr(
            format!("{} + {}", self.name, other.name),
            add(&self.expr, &other.expr),
        )
    }

    pub fn sub_obs(&self, other: &Observable) -> Observable {
        Observable::from_expr(
            format!("{} - {}", self.name, other.name),
            sub(&self.expr, &other.expr),
        )
    }

    pub fn mul_obs(&self, other: &Observable) -> Observable {
        Observable::from_expr(
            format!("{} * {}", self.name, other.name),
            mul(&self.expr, &other.expr),
        )
    }

    pub fn scaled(&self, c: f64) -> Observable {
        Observable::from_expr(format!("{c} * {}", self.name), scale(c, &self.expr))
    }
}

/// Constrained phase point: `x` on the hyperboloid and covariant `p` with `x.p = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: FourVector,
    pub p: [f64; 4],
}

impl PhasePoint {
    /// Build from chart data: spatial position and unconstrained spatial momentum.
    /// The fourth components are filled in so both constraints hold exactly.
    pub fn from_chart(spatial: [f64; 3], p_spatial: [f64; 3]) -> PhasePoint {
        let x = HyperPoint::lift(spatial);
        let x4 = x.x4();
        let xp: f64 = spatial
            .iter()
            .zip(&p_spatial)
            .map(|(a, b)| a * b)
            .sum();
        PhasePoint {
            x: *x.as_four_vector(),
            p: [p_spatial[0], p_spatial[1], p_spatial[2], -xp / x4],
        }
    }

    pub fn vars(&self) -> [f64; PHASE_DIM] {
        [
            self.x.0[0], self.x.0[1], self.x.0[2], self.x.0[3], self.p[0], self.p[1], self.p[2],
            self.p[3],
        ]
    }

    /// Residuals of the two constraints `(x.x + 1, x.p)`.
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let xx = self.x.norm2();
        let xp: f64 = (0..4).map(|i| self.x.0[i] * self.p[i]).sum();
        (xx + 1.0, xp)
    }

    /// Energy `-C = p.p` must be positive for the square-root generators.
    pub fn energy(&self) -> f64 {
        let p = &self.p;
        p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - p[3] * p[3]
    }
}

/// Seeded sampler of constrained phase points. Points with energy below
/// `MIN_ENERGY` are rejected so the square-root generators stay smooth.
pub const MIN_ENERGY: f64 = 1e-8;

pub fn sample_phase_points(
    count: usize,
    seed: u64,
    radius_scale: f64,
    momentum_scale: f64,
) -> Vec<PhasePoint> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pos = Normal::new(0.0, radius_scale).expect("finite scale");
    let mom = Normal::new(0.0, momentum_scale).expect("finite scale");
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let xs = [pos.sample(&mut rng), pos.sample(&mut rng), pos.sample(&mut rng)];
        let ps = [mom.sample(&mut rng), mom.sample(&mut rng), mom.sample(&mut rng)];
        let pt = PhasePoint::from_chart(xs, ps);
        if pt.energy() > MIN_ENERGY {
            out.push(pt);
        }
    }
    out
}

fn phi1_expr() -> Arc<Expr> {
    // x.x + 1
    let mut terms = Vec::new();
    for i in 0..4 {
        terms.push(scale(METRIC_DIAG[i], &mul(&var(i), &var(i))));
    }
    terms.push(cx(1.0));
    total(terms)
}

fn phi2_expr() -> Arc<Expr> {
    // x.p = x^i p_i
    total((0..4).map(|i| mul(&var(i), &var(4 + i))).collect())
}

/// The two second-class constraints as observables.
pub fn constraints() -> (Observable, Observable) {
    (
        Observable::from_expr("x.x + 1", phi1_expr()),
        Observable::from_expr("x.p", phi2_expr()),
    )
}

fn poisson_combine<S: ScalarArith>(df: &[S; PHASE_DIM], dg: &[S; PHASE_DIM]) -> S {
    let mut acc = S::zero();
    for i in 0..4 {
        acc = acc + df[i] * dg[4 + i] - df[4 + i] * dg[i];
    }
    acc
}

fn gradient_of<S: PhaseScalar>(
    e: &Expr,
    vars: &[S; PHASE_DIM],
) -> Result<(S, [S; PHASE_DIM]), BracketError> {
    let seeds: [S::Lifted; PHASE_DIM] = std::array::from_fn(|i| vars[i].lift_seed(i));
    let r = eval_expr(e, &seeds)?;
    Ok(S::unlift(r))
}

fn eval_expr<S: PhaseScalar>(e: &Expr, vars: &[S; PHASE_DIM]) -> Result<S, BracketError> {
    Ok(match e {
        Expr::Const(c) => S::from_f64(*c),
        Expr::Var(i) => vars[*i],
        Expr::Add(a, b) => eval_expr(a, vars)? + eval_expr(b, vars)?,
        Expr::Sub(a, b) => eval_expr(a, vars)? - eval_expr(b, vars)?,
        Expr::Mul(a, b) => eval_expr(a, vars)? * eval_expr(b, vars)?,
        Expr::Neg(a) => -eval_expr(a, vars)?,
        Expr::Sqrt(a) => {
            let inner = eval_expr(a, vars)?;
            if inner.leading() <= MIN_ENERGY {
                return Err(BracketError::SqrtDomain(inner.leading()));
            }
            inner.sqrt()
        }
        Expr::Poisson(f, g) => {
            if !S::CAN_LIFT {
                return Err(BracketError::NestingTooDeep);
            }
            let (_, df) = gradient_of(f, vars)?;
            let (_, dg) = gradient_of(g, vars)?;
            poisson_combine(&df, &dg)
        }
        Expr::Dirac(f, g) => {
            if !S::CAN_LIFT {
                return Err(BracketError::NestingTooDeep);
            }
            let (_, df) = gradient_of(f, vars)?;
            let (_, dg) = gradient_of(g, vars)?;
            let (_, d1) = gradient_of(&phi1_expr(), vars)?;
            let (_, d2) = gradient_of(&phi2_expr(), vars)?;
            let c12 = poisson_combine(&d1, &d2);
            if c12.leading().abs() < 1e-10 {
                return Err(BracketError::DegenerateConstraints(c12.leading()));
            }
            // C = [[0, c12], [-c12, 0]], so C^-1 = [[0, -1/c12], [1/c12, 0]].
            let pb_fg = poisson_combine(&df, &dg);
            let pb_f1 = poisson_combine(&df, &d1);
            let pb_f2 = poisson_combine(&df, &d2);
            let pb_1g = poisson_combine(&d1, &dg);
            let pb_2g = poisson_combine(&d2, &dg);
            pb_fg - (pb_f2 * pb_1g - pb_f1 * pb_2g) / c12
        }
    })
}

/// Canonical (unconstrained) Poisson bracket at a point.
pub fn canonical_poisson(
    f: &Observable,
    g: &Observable,
    pt: &PhasePoint,
) -> Result<f64, BracketError> {
    f.poisson_with(g).eval(pt)
}

/// Dirac bracket at a point, derived generically from the constraint pair.
pub fn dirac_bracket(
    f: &Observable,
    g: &Observable,
    pt: &PhasePoint,
) -> Result<f64, BracketError> {
    f.dirac_with(g).eval(pt)
}

/// Metric on generator indices 1..=6: diag(1, 1, 1, -1, -1, 1).
pub const GENERATOR_METRIC: [f64; 6] = [1.0, 1.0, 1.0, -1.0, -1.0, 1.0];

/// Index pair labelling a generator of the conformal algebra so(4,2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneratorId {
    pub a: usize,
    pub b: usize,
}

impl GeneratorId {
    pub fn new(a: usize, b: usize) -> GeneratorId {
        assert!((1..=6).contains(&a) && (1..=6).contains(&b) && a != b);
        GeneratorId { a, b }
    }

    /// All fifteen canonical pairs `a < b`.
    pub fn canonical_list() -> Vec<GeneratorId> {
        let mut v = Vec::with_capacity(15);
        for a in 1..=6 {
            for b in (a + 1)..=6 {
                v.push(GeneratorId { a, b });
            }
        }
        v
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M({},{})", self.a, self.b)
    }
}

/// Covariant coordinate `x_i = g_ii x^i`.
fn x_lower(i: usize) -> Arc<Expr> {
    scale(METRIC_DIAG[i - 1], &var(i - 1))
}

/// Angular-momentum component with both indices down: `J_ij = x_i p_j - x_j p_i`.
fn j_lower(i: usize, j: usize) -> Arc<Expr> {
    sub(&mul(&x_lower(i), &var(3 + j)), &mul(&x_lower(j), &var(3 + i)))
}

/// Casimir `C = 1/2 J_ij J^ij = sum_{i<j} g^ii g^jj J_ij^2`.
fn casimir_expr() -> Arc<Expr> {
    let mut terms = Vec::new();
    for i in 1..=4 {
        for j in (i + 1)..=4 {
            let jij = j_lower(i, j);
            let sign = METRIC_DIAG[i - 1] * METRIC_DIAG[j - 1];
            terms.push(scale(sign, &mul(&jij, &jij)));
        }
    }
    total(terms)
}

fn sqrt_minus_c_expr() -> Arc<Expr> {
    Arc::new(Expr::Sqrt(neg(&casimir_expr())))
}

/// Contraction `J_ik x^k` appearing in the sixth row of generators.
fn j_contract_x(i: usize) -> Arc<Expr> {
    total((1..=4).map(|k| mul(&j_lower(i, k), &var(k - 1))).collect())
}

/// Realize a generator as a phase-space observable.
///
/// Canonical forms: `M_ij = J_ij` for `i, j <= 4`, `M_5i = sqrt(-C) x_i`,
/// `M_6i = J_ik x^k`, `M_56 = sqrt(-C)`; other index orders follow by
/// antisymmetry.
pub fn realize_generator(id: GeneratorId) -> Observable {
    let (a, b) = (id.a, id.b);
    let name = id.to_string();
    let expr = match (a, b) {
        (a, b) if a <= 4 && b <= 4 => j_lower(a, b),
        (5, i) if i <= 4 => mul(&sqrt_minus_c_expr(), &x_lower(i)),
        (i, 5) if i <= 4 => neg(&mul(&sqrt_minus_c_expr(), &x_lower(i))),
        (6, i) if i <= 4 => j_contract_x(i),
        (i, 6) if i <= 4 => neg(&j_contract_x(i)),
        (5, 6) => sqrt_minus_c_expr(),
        (6, 5) => neg(&sqrt_minus_c_expr()),
        _ => unreachable!(),
    };
    Observable::from_expr(name, expr)
}

/// Casimir `C` and the Hamiltonian `-C` as observables.
pub fn casimir() -> Observable {
    Observable::from_expr("C", casimir_expr())
}

pub fn hamiltonian() -> Observable {
    Observable::from_expr("H", neg(&casimir_expr()))
}

/// Chart-form energy `pi^2 + (x.pi)^2` computed from the ambient point.
///
/// On shell the ambient momentum equals the velocity, so the chart Legendre
/// momentum is `pi_alpha = p_alpha - x_alpha (x.p) / (1 + |x|^2)` and
/// `x.pi = (x.p) / (1 + |x|^2)`, spatial dots throughout. The combination
/// below reproduces the ambient `p.p` exactly.
pub fn chart_hamiltonian(pt: &PhasePoint) -> f64 {
    let xs = [pt.x.0[0], pt.x.0[1], pt.x.0[2]];
    let ps = [pt.p[0], pt.p[1], pt.p[2]];
    let x2: f64 = xs.iter().map(|v| v * v).sum();
    let xp: f64 = xs.iter().zip(&ps).map(|(a, b)| a * b).sum();
    let xpi = xp / (1.0 + x2);
    let pi: Vec<f64> = (0..3).map(|a| ps[a] - xs[a] * xpi).collect();
    let pi2: f64 = pi.iter().map(|v| v * v).sum();
    pi2 + xpi * xpi
}

/// Right-hand side of the structure relation
/// `{M_ab, M_cd} = g_ac M_bd + g_bd M_ac - g_ad M_bc - g_bc M_ad`
/// evaluated from a table of generator values.
///
/// The sign pattern is fixed by the canonical convention
/// `{f, g} = df/dx dg/dp - df/dp dg/dx` together with the realization;
/// it is what the bracket engine actually produces, e.g.
/// `{J_12, J_23} = -J_13` and `{M_56, M_51} = -M_61`.
fn structure_rhs(vals: &[[f64; 7]; 7], a: usize, b: usize, c: usize, d: usize) -> f64 {
    let g = |i: usize| GENERATOR_METRIC[i - 1];
    let m = |i: usize, j: usize| vals[i][j];
    g(a) * kron(a, c) * m(b, d) + g(b) * kron(b, d) * m(a, c)
        - g(a) * kron(a, d) * m(b, c)
        - g(b) * kron(b, c) * m(a, d)
}

fn kron(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Antisymmetric table of all generator values at a point.
pub fn generator_values(pt: &PhasePoint) -> Result<[[f64; 7]; 7], BracketError> {
    let mut vals = [[0.0; 7]; 7];
    for id in GeneratorId::canonical_list() {
        let v = realize_generator(id).eval(pt)?;
        vals[id.a][id.b] = v;
        vals[id.b][id.a] = -v;
    }
    Ok(vals)
}

/// Result row for one verified relation.
#[derive(Debug, Clone)]
pub struct RelationResidual {
    pub relation: String,
    pub max_residual: f64,
}

/// Outcome of a relation suite: per-relation maxima over the sampled points.
#[derive(Debug, Clone)]
pub struct RelationReport {
    pub rows: Vec<RelationResidual>,
    pub points: usize,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.max_residual).fold(0.0, f64::max)
    }
}

/// Verify all 105 unordered generator pairs against the structure constants.
pub fn check_structure_relations(
    points: &[PhasePoint],
) -> Result<RelationReport, BracketError> {
    let ids = GeneratorId::canonical_list();
    let obs: Vec<Observable> = ids.iter().map(|&id| realize_generator(id)).collect();
    let brackets: Vec<Vec<Observable>> = (0..ids.len())
        .map(|i| {
            ((i + 1)..ids.len())
                .map(|j| obs[i].dirac_with(&obs[j]))
                .collect()
        })
        .collect();
    let mut rows: Vec<RelationResidual> = Vec::with_capacity(105);
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            rows.push(RelationResidual {
                relation: format!("{{{}, {}}}", ids[i], ids[j]),
                max_residual: 0.0,
            });
        }
    }
    for pt in points {
        let vals = generator_values(pt)?;
        let mut row = 0;
        for i in 0..ids.len() {
            for j in (i + 1)..ids.len() {
                let lhs = brackets[i][j - i - 1].eval(pt)?;
                let rhs = structure_rhs(&vals, ids[i].a, ids[i].b, ids[j].a, ids[j].b);
                let res = (lhs - rhs).abs();
                if res > rows[row].max_residual {
                    rows[row].max_residual = res;
                }
                row += 1;
            }
        }
    }
    Ok(RelationReport {
        rows,
        points: points.len(),
    })
}

/// Parity of a permutation given as a list of distinct indices.
fn permutation_sign(idx: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..idx.len() {
        for j in (i + 1)..idx.len() {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Restrictive quadratic relations: `T_ab = M_ac M_bd g^cd`,
/// `R^ab = eps^{abcdef} M_cd M_ef`, and the four-index contraction
/// `eps^{ijkl} J_ij J_kl`. All must vanish on the physical realization.
pub fn check_restrictive_relations(
    points: &[PhasePoint],
) -> Result<RelationReport, BracketError> {
    let mut t_max = 0.0f64;
    let mut r_max = 0.0f64;
    let mut eps4_max = 0.0f64;
    for pt in points {
        let m = generator_values(pt)?;
        for a in 1..=6 {
            for b in 1..=6 {
                let mut t = 0.0;
                for c in 1..=6 {
                    t += m[a][c] * m[b][c] * GENERATOR_METRIC[c - 1];
                }
                t_max = t_max.max(t.abs());
            }
        }
        for a in 1..=6 {
            for b in (a + 1)..=6 {
                let mut r = 0.0;
                for c in 1..=6 {
                    for d in 1..=6 {
                        for e in 1..=6 {
                            for f in 1..=6 {
                                let s = permutation_sign(&[a, b, c, d, e, f]);
                                if s != 0.0 {
                                    r += s * m[c][d] * m[e][f];
                                }
                            }
                        }
                    }
                }
                r_max = r_max.max(r.abs());
            }
        }
        let mut e4 = 0.0;
        for i in 1..=4 {
            for j in 1..=4 {
                for k in 1..=4 {
                    for l in 1..=4 {
                        let s = permutation_sign(&[i, j, k, l]);
                        if s != 0.0 {
                            e4 += s * m[i][j] * m[k][l];
                        }
                    }
                }
            }
        }
        eps4_max = eps4_max.max(e4.abs());
    }
    Ok(RelationReport {
        rows: vec![
            RelationResidual {
                relation: "T_ab = M_ac M_bd g^cd".into(),
                max_residual: t_max,
            },
            RelationResidual {
                relation: "R^ab = eps^abcdef M_cd M_ef".into(),
                max_residual: r_max,
            },
            RelationResidual {
                relation: "eps^ijkl J_ij J_kl".into(),
                max_residual: eps4_max,
            },
        ],
        points: points.len(),
    })
}

/// Bracket identities tying the Casimir square root to the vector generators.
pub fn check_sqrtc_relations(points: &[PhasePoint]) -> Result<RelationReport, BracketError> {
    let c_obs = casimir();
    let sqrt_c = realize_generator(GeneratorId::new(5, 6));
    let mut rows = Vec::new();
    let residual = |name: String, lhs: &Observable, rhs_vals: &dyn Fn(&PhasePoint) -> Result<f64, BracketError>|
     -> Result<RelationResidual, BracketError> {
        let mut max = 0.0f64;
        for pt in points {
            let l = lhs.eval(pt)?;
            let r = rhs_vals(pt)?;
            max = max.max((l - r).abs());
        }
        Ok(RelationResidual {
            relation: name,
            max_residual: max,
        })
    };

    for i in 1..=4 {
        let xi = Observable::from_expr(format!("x_{i}"), x_lower(i));
        let l_i = realize_generator(GeneratorId::new(6, i));
        let k_i = realize_generator(GeneratorId::new(5, i));

        // {C, x_i} = 2 J_ik x^k
        let lhs = c_obs.dirac_with(&xi);
        rows.push(residual(format!("{{C, x_{i}}} = 2 J_{i}k x^k"), &lhs, &|pt| {
            Ok(2.0 * realize_generator(GeneratorId::new(6, i)).eval(pt)?)
        })?);

        // {C, J_ik x^k} = -2 C x_i
        let lhs = c_obs.dirac_with(&l_i);
        rows.push(residual(format!("{{C, J_{i}k x^k}} = -2 C x_{i}"), &lhs, &|pt| {
            Ok(-2.0 * casimir().eval(pt)? * Observable::from_expr("x", x_lower(i)).eval(pt)?)
        })?);

        // {sqrt(-C), x_i sqrt(-C)} = -J_ik x^k
        let lhs = sqrt_c.dirac_with(&k_i);
        rows.push(residual(
            format!("{{sqrt(-C), x_{i} sqrt(-C)}} = -J_{i}k x^k"),
            &lhs,
            &|pt| Ok(-realize_generator(GeneratorId::new(6, i)).eval(pt)?),
        )?);

        // {sqrt(-C), J_ik x^k} = -sqrt(-C) x_i
        let lhs = sqrt_c.dirac_with(&l_i);
        rows.push(residual(
            format!("{{sqrt(-C), J_{i}k x^k}} = -sqrt(-C) x_{i}"),
            &lhs,
            &|pt| Ok(-realize_generator(GeneratorId::new(5, i)).eval(pt)?),
        )?);

        for j in 1..=4 {
            if j <= i {
                continue;
            }
            let k_j = realize_generator(GeneratorId::new(5, j));
            // {sqrt(-C) x_i, sqrt(-C) x_j} = -J_ij
            let lhs = k_i.dirac_with(&k_j);
            rows.push(residual(
                format!("{{sqrt(-C) x_{i}, sqrt(-C) x_{j}}} = -J_{i}{j}"),
                &lhs,
                &|pt| Ok(-Observable::from_expr("J", j_lower(i, j)).eval(pt)?),
            )?);

            let l_j = realize_generator(GeneratorId::new(6, j));
            // {J_ik x^k, J_jl x^l} = J_ij
            let lhs = l_i.dirac_with(&l_j);
            rows.push(residual(
                format!("{{J_{i}k x^k, J_{j}l x^l}} = J_{i}{j}"),
                &lhs,
                &|pt| Observable::from_expr("J", j_lower(i, j)).eval(pt),
            )?);
        }

        for j in 1..=4 {
            let l_j = realize_generator(GeneratorId::new(6, j));
            // {sqrt(-C) x_i, J_jk x^k} = sqrt(-C) g_ij
            let lhs = k_i.dirac_with(&l_j);
            let gij = if i == j { METRIC_DIAG[i - 1] } else { 0.0 };
            rows.push(residual(
                format!("{{sqrt(-C) x_{i}, J_{j}k x^k}} = sqrt(-C) g_{i}{j}"),
                &lhs,
                &move |pt| Ok(gij * realize_generator(GeneratorId::new(5, 6)).eval(pt)?),
            )?);
        }
    }
    Ok(RelationReport {
        rows,
        points: points.len(),
    })
}

/// Jacobi cycle `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` for the Dirac bracket.
pub fn jacobi_residual(
    f: &Observable,
    g: &Observable,
    h: &Observable,
    pt: &PhasePoint,
) -> Result<f64, BracketError> {
    let t1 = f.dirac_with(&g.dirac_with(h)).eval(pt)?;
    let t2 = g.dirac_with(&h.dirac_with(f)).eval(pt)?;
    let t3 = h.dirac_with(&f.dirac_with(g)).eval(pt)?;
    Ok(t1 + t2 + t3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apex_rest() -> PhasePoint {
        PhasePoint::from_chart([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    }

    fn sample_points(n: usize) -> Vec<PhasePoint> {
        sample_phase_points(n, 42, 2.0, 1.0)
    }

    #[test]
    fn sampled_points_satisfy_constraints() {
        for pt in sample_points(50) {
            let (c1, c2) = pt.constraint_residuals();
            assert!(c1.abs() < 1e-12, "x.x + 1 = {c1:e}");
            assert!(c2.abs() < 1e-12, "x.p = {c2:e}");
            assert!(pt.energy() > MIN_ENERGY);
        }
    }

    #[test]
    fn canonical_pairs() {
        let pt = sample_points(1)[0];
        let x1 = Observable::x_upper(1);
        let p1 = Observable::p_lower(1);
        let x2 = Observable::x_upper(2);
        let p2 = Observable::p_lower(2);
        assert_eq!(canonical_poisson(&x1, &p1, &pt).unwrap(), 1.0);
        assert_eq!(canonical_poisson(&x1, &x2, &pt).unwrap(), 0.0);
        assert_eq!(canonical_poisson(&p1, &p2, &pt).unwrap(), 0.0);
        assert_eq!(canonical_poisson(&p1, &x1, &pt).unwrap(), -1.0);
        assert_eq!(canonical_poisson(&x2, &p2, &pt).unwrap(), 1.0);
    }

    #[test]
    fn dirac_bracket_of_coordinates_vanishes() {
        for pt in sample_points(10) {
            for i in 1..=4 {
                for j in 1..=4 {
                    let b = dirac_bracket(&Observable::x_upper(i), &Observable::x_upper(j), &pt)
                        .unwrap();
                    assert!(b.abs() < 1e-12, "{{x^{i}, x^{j}}} = {b:e}");
                }
            }
        }
    }

    #[test]
    fn dirac_bracket_projector_form() {
        // The engine determines {x^j, p_i}_D = delta^j_i + x_i x^j on shell
        // (the sign of the correction term is read off, not assumed).
        for pt in sample_points(10) {
            let xl = pt.x.lower();
            for i in 1..=4usize {
                for j in 1..=4usize {
                    let b = dirac_bracket(&Observable::x_upper(j), &Observable::p_lower(i), &pt)
                        .unwrap();
                    let expected = kron(i, j) + xl[i - 1] * pt.x.0[j - 1];
                    assert!(
                        (b - expected).abs() < 1e-10,
                        "{{x^{j}, p_{i}}} = {b} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn dirac_bracket_apex_canonical_value() {
        // At the apex the projector correction vanishes in the (1,1) slot.
        let pt = PhasePoint::from_chart([0.0, 0.0, 0.0], [0.3, -0.2, 0.9]);
        let b = dirac_bracket(&Observable::x_upper(1), &Observable::p_lower(1), &pt).unwrap();
        assert!((b - 1.0).abs() < 1e-14);
        let anti = dirac_bracket(&Observable::p_lower(1), &Observable::x_upper(1), &pt).unwrap();
        assert!((anti + 1.0).abs() < 1e-14);
    }

    #[test]
    fn dirac_bracket_of_momenta_gives_rotation() {
        for pt in sample_points(10) {
            for i in 1..=4usize {
                for j in 1..=4usize {
                    let b = dirac_bracket(&Observable::p_lower(i), &Observable::p_lower(j), &pt)
                        .unwrap();
                    let jij = Observable::from_expr("J", j_lower(i, j)).eval(&pt).unwrap();
                    assert!((b - jij).abs() < 1e-10, "{{p_{i}, p_{j}}} = {b} vs {jij}");
                }
            }
        }
    }

    #[test]
    fn constraints_are_casimirs_of_the_dirac_bracket() {
        let (phi1, phi2) = constraints();
        for pt in sample_points(5) {
            for id in GeneratorId::canonical_list() {
                let m = realize_generator(id);
                let b1 = dirac_bracket(&phi1, &m, &pt).unwrap();
                let b2 = dirac_bracket(&phi2, &m, &pt).unwrap();
                assert!(b1.abs() < 1e-9, "{{phi1, {id}}} = {b1:e}");
                assert!(b2.abs() < 1e-9, "{{phi2, {id}}} = {b2:e}");
            }
        }
    }

    #[test]
    fn hamiltonian_matches_chart_form() {
        for pt in sample_points(25) {
            let ambient = hamiltonian().eval(&pt).unwrap();
            let chart = chart_hamiltonian(&pt);
            assert!(
                (ambient - chart).abs() < 1e-10 * (1.0 + ambient.abs()),
                "ambient {ambient} vs chart {chart}"
            );
            // -C also equals p.p on the constraint surface.
            assert!((ambient - pt.energy()).abs() < 1e-10 * (1.0 + ambient.abs()));
        }
    }

    #[test]
    fn structure_example_pairs() {
        for pt in sample_points(5) {
            // {M_56, M_51} = -M_61
            let m56 = realize_generator(GeneratorId::new(5, 6));
            let m51 = realize_generator(GeneratorId::new(5, 1));
            let m61 = realize_generator(GeneratorId::new(6, 1));
            let lhs = dirac_bracket(&m56, &m51, &pt).unwrap();
            let rhs = -m61.eval(&pt).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");

            // {M_12, M_23} = -M_13
            let m12 = realize_generator(GeneratorId::new(1, 2));
            let m23 = realize_generator(GeneratorId::new(2, 3));
            let m13 = realize_generator(GeneratorId::new(1, 3));
            let lhs = dirac_bracket(&m12, &m23, &pt).unwrap();
            let rhs = -m13.eval(&pt).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");

            // {M_35, M_13}: shared index appears as a = d under one ordering,
            // which exercises the g_ad M_bc term.
            let m35 = realize_generator(GeneratorId::new(3, 5));
            let m13b = realize_generator(GeneratorId::new(1, 3));
            let lhs = dirac_bracket(&m35, &m13b, &pt).unwrap();
            let vals = generator_values(&pt).unwrap();
            let rhs = structure_rhs(&vals, 3, 5, 1, 3);
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
            // and the closed form of that entry is -g_33 M_51 = -M_51.
            assert!((rhs + vals[5][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn structure_relations_all_pairs_small_sample() {
        let pts = sample_points(20);
        let report = check_structure_relations(&pts).unwrap();
        assert_eq!(report.rows.len(), 105);
        assert!(
            report.max_residual() < 1e-10,
            "max structure residual {:e}",
            report.max_residual()
        );
    }

    #[test]
    fn restrictive_relations_vanish() {
        let pts = sample_points(20);
        let report = check_restrictive_relations(&pts).unwrap();
        for row in &report.rows {
            assert!(
                row.max_residual < 1e-10,
                "{}: {:e}",
                row.relation,
                row.max_residual
            );
        }
    }

    #[test]
    fn sqrtc_relations_hold() {
        let pts = sample_points(10);
        let report = check_sqrtc_relations(&pts).unwrap();
        for row in &report.rows {
            assert!(
                row.max_residual < 1e-9,
                "{}: {:e}",
                row.relation,
                row.max_residual
            );
        }
    }

    #[test]
    fn jacobi_identity_for_dirac_bracket() {
        let pts = sample_points(5);
        let trios = [
            ((1, 2), (2, 3), (1, 3)),
            ((5, 6), (5, 1), (6, 1)),
            ((1, 4), (5, 2), (6, 3)),
            ((2, 4), (3, 5), (1, 6)),
        ];
        for pt in &pts {
            for &(a, b, c) in &trios {
                let f = realize_generator(GeneratorId::new(a.0, a.1));
                let g = realize_generator(GeneratorId::new(b.0, b.1));
                let h = realize_generator(GeneratorId::new(c.0, c.1));
                let r = jacobi_residual(&f, &g, &h, pt).unwrap();
                assert!(r.abs() < 1e-7, "jacobi({f:?},{g:?},{h:?}) = {r:e}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pt = sample_points(1)[0];
        let m = realize_generator(GeneratorId::new(5, 2));
        let grad = m.gradient(&pt).unwrap();
        let vars = pt.vars();
        let h = 1e-5;
        for i in 0..PHASE_DIM {
            let mut up = vars;
            let mut dn = vars;
            up[i] += h;
            dn[i] -= h;
            let up_pt = PhasePoint {
                x: FourVector([up[0], up[1], up[2], up[3]]),
                p: [up[4], up[5], up[6], up[7]],
            };
            let dn_pt = PhasePoint {
                x: FourVector([dn[0], dn[1], dn[2], dn[3]]),
                p: [dn[4], dn[5], dn[6], dn[7]],
            };
            let fd = (m.eval(&up_pt).unwrap() - m.eval(&dn_pt).unwrap()) / (2.0 * h);
            assert!(
                (grad[i] - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                "partial {i}: {} vs {fd}",
                grad[i]
            );
        }
    }

    #[test]
    fn sqrt_domain_error_reported() {
        // At rest the energy vanishes and sqrt(-C) must refuse to evaluate.
        let pt = apex_rest();
        let m56 = realize_generator(GeneratorId::new(5, 6));
        match m56.eval(&pt) {
            Err(BracketError::SqrtDomain(v)) => assert!(v.abs() <= MIN_ENERGY),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn nesting_error_beyond_depth() {
        let pt = sample_points(1)[0];
        let a = realize_generator(GeneratorId::new(1, 2));
        let b = realize_generator(GeneratorId::new(2, 3));
        // Four levels of brackets exceed the provided depth.
        let b1 = a.dirac_with(&b);
        let b2 = a.dirac_with(&b1);
        let b3 = a.dirac_with(&b2);
        let b4 = a.dirac_with(&b3);
        assert!(b3.eval(&pt).is_ok());
        assert_eq!(b4.eval(&pt).unwrap_err(), BracketError::NestingTooDeep);
    }
}
