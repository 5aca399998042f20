//! Differential-operator realization of the symmetry algebra on functions
//! over the hyperboloid: hyperbolic plane waves, the eigenvalue law, ladder
//! actions, and the complex-power ladder.
//!
//! Wave functions carry a jet evaluator (exact partial derivatives up to the
//! stored order) and, for plane waves, a spectral label. Operators built
//! from functions of the spectral parameter (K, L, A±) act at the label
//! level: on eigenfunctions they are scalars, and that is the only way the
//! source relations ever use them.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::cjet::{CDual2, Jet, JET_ORDER};
use crate::geometry::{ConeVector, HyperPoint};
use crate::quad::QuadratureSpec;
use crate::special::{ladder_coefficient, ladder_coefficient_continued, SpecialError};

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("operator needs {required} derivative orders, only {available} remain")]
    InsufficientOrder { required: usize, available: usize },
    #[error("operator acts at the label level but the wave function has no label")]
    LabelRequired,
    #[error("ladder fit failed: max deviation {max_deviation:e}")]
    Mismatch { max_deviation: f64 },
    #[error("invalid operator: {0}")]
    InvalidHandle(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("sample point too close to the singular locus: f = {0}")]
    Domain(f64),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Plane-wave label: forward cone vector and real spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveLabel {
    pub k: ConeVector,
    pub rho: f64,
}

/// Label after ladder actions; the spectral parameter may be complex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedLabel {
    pub k: ConeVector,
    pub rho: Complex64,
}

/// Outcome of a ladder action: scalar coefficient and the shifted label.
#[derive(Debug, Clone, Copy)]
pub struct LadderResult {
    pub coefficient: Complex64,
    pub shifted_label: ShiftedLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    K,
    L,
    APlus,
    AMinus,
}

/// Operator names; indices are 1-based (spatial 1..3, boost row 4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorHandle {
    Identity,
    X(usize),
    P(usize),
    J(usize, usize),
    H,
    TDotK(ConeVector),
    KDotK,
    LDotK,
    APlusDotK,
    AMinusDotK,
    SpectralH,
}

impl OperatorHandle {
    /// Derivative orders consumed by one application.
    pub fn order_cost(&self) -> usize {
        match self {
            OperatorHandle::Identity
            | OperatorHandle::X(_)
            | OperatorHandle::KDotK
            | OperatorHandle::LDotK
            | OperatorHandle::APlusDotK
            | OperatorHandle::AMinusDotK
            | OperatorHandle::SpectralH => 0,
            OperatorHandle::P(_) | OperatorHandle::J(_, _) | OperatorHandle::TDotK(_) => 1,
            OperatorHandle::H => 2,
        }
    }
}

type Eval = Arc<dyn Fn(&[Jet; 3]) -> Jet + Send + Sync>;

#[derive(Clone)]
pub struct WaveFunction {
    eval: Eval,
    pub label: Option<ShiftedLabel>,
    /// Derivative orders still available for operator applications.
    pub order: usize,
}

impl WaveFunction {
    pub fn from_closure<F>(f: F) -> WaveFunction
    where
        F: Fn(&[Jet; 3]) -> Jet + Send + Sync + 'static,
    {
        WaveFunction {
            eval: Arc::new(f),
            label: None,
            order: JET_ORDER,
        }
    }

    pub fn evaluate(&self, x: &HyperPoint) -> Complex64 {
        let s = x.spatial();
        let seeds = [
            Jet::variable(s[0], 0),
            Jet::variable(s[1], 1),
            Jet::variable(s[2], 2),
        ];
        (self.eval)(&seeds).value()
    }
}

fn i_c() -> Complex64 {
    Complex64::i()
}

/// Jet of x4 = sqrt(x^2 + 1) over the chart seeds.
fn x4_jet(s: &[Jet; 3]) -> Jet {
    conformal_jet(s).sqrt()
}

/// Jet of x^2 + 1.
fn conformal_jet(s: &[Jet; 3]) -> Jet {
    (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).add_scalar(Complex64::new(1.0, 0.0))
}

/// Jet of the positive pairing q = |x.k|; strictly positive by the sign
/// lemma, independent of the label's section sign.
fn q_jet(s: &[Jet; 3], k: &ConeVector) -> Jet {
    let e = effective_spatial(k);
    let lin = s[0].scale_re(e[0]) + s[1].scale_re(e[1]) + s[2].scale_re(e[2]);
    lin + x4_jet(s).scale_re(k.omega)
}

/// Spatial covector e with q = e.x + omega x4 > 0 regardless of sigma.
fn effective_spatial(k: &ConeVector) -> [f64; 3] {
    let s = -f64::from(k.sigma) * k.omega;
    [s * k.n[0], s * k.n[1], s * k.n[2]]
}

/// Plane wave q^(-1 + i rho); the label records (k, rho).
pub fn plane_wave(label: &PlaneWaveLabel) -> WaveFunction {
    let mut wf = plane_wave_shifted(&ShiftedLabel {
        k: label.k,
        rho: Complex64::new(label.rho, 0.0),
    });
    wf.order = JET_ORDER;
    wf
}

/// Plane wave with a complex spectral parameter (ladder images live here).
pub fn plane_wave_shifted(label: &ShiftedLabel) -> WaveFunction {
    let k = label.k;
    let s = Complex64::new(-1.0, 0.0) + i_c() * label.rho;
    WaveFunction {
        eval: Arc::new(move |seeds: &[Jet; 3]| q_jet(seeds, &k).powc(s)),
        label: Some(*label),
        order: JET_ORDER,
    }
}

fn momentum_jet(inner: &Jet, s: &[Jet; 3], axis: usize) -> Jet {
    // P = -i d + (i/2) x / (x^2 + 1), the Hermitian momentum.
    let d = inner.derivative(axis);
    let conf = s[axis] * conformal_jet(s).recip() * *inner;
    d.scale(-i_c()) + conf.scale(0.5 * i_c())
}

/// Applies an operator handle, producing a new wave function.
pub fn apply(handle: &OperatorHandle, psi: &WaveFunction) -> Result<WaveFunction, QuantumError> {
    let cost = handle.order_cost();
    if cost > psi.order {
        return Err(QuantumError::InsufficientOrder {
            required: cost,
            available: psi.order,
        });
    }
    let inner = psi.eval.clone();
    let order = psi.order - cost;
    let check_axis = |a: usize| -> Result<usize, QuantumError> {
        if (1..=3).contains(&a) {
            Ok(a - 1)
        } else {
            Err(QuantumError::InvalidHandle(format!("spatial index {a}")))
        }
    };
    let eval: Eval = match handle {
        OperatorHandle::Identity => inner,
        OperatorHandle::X(a) => {
            let a = check_axis(*a)?;
            Arc::new(move |s: &[Jet; 3]| inner(s) * s[a])
        }
        OperatorHandle::P(a) => {
            let a = check_axis(*a)?;
            Arc::new(move |s: &[Jet; 3]| momentum_jet(&inner(s), s, a))
        }
        OperatorHandle::J(a, b) => {
            if a == b || !(1..=4).contains(a) || !(1..=4).contains(b) {
                return Err(QuantumError::InvalidHandle(format!("rotation pair ({a},{b})")));
            }
            match (*a, *b) {
                (a, 4) => {
                    let a = a - 1;
                    Arc::new(move |s: &[Jet; 3]| {
                        -(x4_jet(s) * momentum_jet(&inner(s), s, a))
                    })
                }
                (4, b) => {
                    let b = b - 1;
                    Arc::new(move |s: &[Jet; 3]| x4_jet(s) * momentum_jet(&inner(s), s, b))
                }
                (a, b) => {
                    let (a, b) = (a - 1, b - 1);
                    Arc::new(move |s: &[Jet; 3]| {
                        let f = inner(s);
                        let term = s[a] * f.derivative(b) - s[b] * f.derivative(a);
                        term.scale(-i_c())
                    })
                }
            }
        }
        OperatorHandle::H => Arc::new(move |s: &[Jet; 3]| {
            // Divergence form expanded once:
            // H = -(d_ab + x_a x_b) d^2_ab - 3 x_b d_b.
            let f = inner(s);
            let d: Vec<Jet> = (0..3).map(|a| f.derivative(a)).collect();
            let mut acc = Jet::constant(Complex64::new(0.0, 0.0));
            for a in 0..3 {
                acc = acc + d[a].derivative(a);
                for b in 0..3 {
                    acc = acc + s[a] * s[b] * d[a].derivative(b);
                }
                acc = acc + (s[a] * d[a]).scale_re(3.0);
            }
            -acc
        }),
        OperatorHandle::TDotK(k) => {
            let k = *k;
            Arc::new(move |s: &[Jet; 3]| {
                let f = inner(s);
                let e = effective_spatial(&k);
                let mut xd = Jet::constant(Complex64::new(0.0, 0.0));
                let mut kd = Jet::constant(Complex64::new(0.0, 0.0));
                for a in 0..3 {
                    let da = f.derivative(a);
                    xd = xd + s[a] * da;
                    kd = kd + da.scale_re(e[a]);
                }
                let q = q_jet(s, &k);
                (q * (xd.scale_re(2.0) + f.scale_re(3.0)) + kd.scale_re(2.0)).scale(i_c())
            })
        }
        OperatorHandle::SpectralH => {
            let label = psi.label.ok_or(QuantumError::LabelRequired)?;
            return Ok(WaveFunction {
                eval: Arc::new(move |s: &[Jet; 3]| inner(s).scale(label.rho)),
                label: Some(label),
                order,
            });
        }
        OperatorHandle::KDotK
        | OperatorHandle::LDotK
        | OperatorHandle::APlusDotK
        | OperatorHandle::AMinusDotK => {
            let label = psi.label.ok_or(QuantumError::LabelRequired)?;
            if label.rho.im != 0.0 {
                return Err(QuantumError::InvalidHandle(
                    "label-level ladder needs a real spectral parameter".into(),
                ));
            }
            let kind = match handle {
                OperatorHandle::KDotK => LadderKind::K,
                OperatorHandle::LDotK => LadderKind::L,
                OperatorHandle::APlusDotK => LadderKind::APlus,
                _ => LadderKind::AMinus,
            };
            let result = ladder_action_kla(
                &PlaneWaveLabel {
                    k: label.k,
                    rho: label.rho.re,
                },
                kind,
            )?;
            let mut out = plane_wave_shifted(&result.shifted_label);
            let coeff = result.coefficient;
            let shifted_eval = out.eval.clone();
            out.eval = Arc::new(move |s: &[Jet; 3]| shifted_eval(s).scale(coeff));
            return Ok(out);
        }
    };
    Ok(WaveFunction {
        eval,
        label: None,
        order,
    })
}

/// |<phi, A psi> - <A phi, psi>| with the invariant inner product
/// int d^3x / sqrt(x^2+1) conj(phi) psi over the chart.
pub fn hermiticity_residual(
    handle: &OperatorHandle,
    phi: &WaveFunction,
    psi: &WaveFunction,
    quad: &QuadratureSpec,
) -> Result<f64, QuantumError> {
    let a_psi = apply(handle, psi)?;
    let a_phi = apply(handle, phi)?;
    let lhs = inner_product(phi, &a_psi, quad)?;
    let rhs = inner_product(&a_phi, psi, quad)?;
    Ok((lhs - rhs).norm())
}

pub fn inner_product(
    phi: &WaveFunction,
    psi: &WaveFunction,
    quad: &QuadratureSpec,
) -> Result<Complex64, QuantumError> {
    let sphere = quad.sphere_rule();
    let (rs, ws) = quad.radial_rule();
    let mut acc = Complex64::new(0.0, 0.0);
    for node in &sphere.nodes {
        for (&r, &wr) in rs.iter().zip(ws.iter()) {
            let x = HyperPoint::lift([node.dir[0] * r, node.dir[1] * r, node.dir[2] * r]);
            let w = node.weight * wr * r * r / (1.0 + r * r).sqrt();
            acc += w * phi.evaluate(&x).conj() * psi.evaluate(&x);
        }
    }
    if !acc.re.is_finite() || !acc.im.is_finite() {
        return Err(QuantumError::Quadrature("non-finite inner product".into()));
    }
    Ok(acc)
}

/// Max over points of |([h1,h2] - sum c_j expected_j) psi| / (1 + |psi|).
pub fn commutator_residual(
    h1: &OperatorHandle,
    h2: &OperatorHandle,
    expected: &[(Complex64, OperatorHandle)],
    psi: &WaveFunction,
    points: &[HyperPoint],
) -> Result<f64, QuantumError> {
    let ab = apply(h1, &apply(h2, psi)?)?;
    let ba = apply(h2, &apply(h1, psi)?)?;
    let mut expected_wfs = Vec::with_capacity(expected.len());
    for (c, h) in expected {
        expected_wfs.push((*c, apply(h, psi)?));
    }
    let mut worst = 0.0f64;
    for x in points {
        let mut v = ab.evaluate(x) - ba.evaluate(x);
        for (c, wf) in &expected_wfs {
            v -= c * wf.evaluate(x);
        }
        let scale = 1.0 + psi.evaluate(x).norm();
        worst = worst.max(v.norm() / scale);
    }
    Ok(worst)
}

/// Applies T.k to the labeled plane wave and fits the pointwise ratio
/// against the rho - i plane wave. Contract: coefficient -(2 rho - i).
pub fn ladder_action_t(
    label: &PlaneWaveLabel,
    points: &[HyperPoint],
) -> Result<LadderResult, QuantumError> {
    let psi = plane_wave(label);
    let t_psi = apply(&OperatorHandle::TDotK(label.k), &psi)?;
    let shifted = ShiftedLabel {
        k: label.k,
        rho: Complex64::new(label.rho, -1.0),
    };
    let target = plane_wave_shifted(&shifted);
    let ratios: Vec<Complex64> = points
        .iter()
        .map(|x| t_psi.evaluate(x) / target.evaluate(x))
        .collect();
    let n = ratios.len() as f64;
    let coefficient = ratios.iter().sum::<Complex64>() / n;
    let max_deviation = ratios
        .iter()
        .map(|r| (r - coefficient).norm())
        .fold(0.0, f64::max);
    if max_deviation > 1e-8 * (1.0 + coefficient.norm()) {
        return Err(QuantumError::Mismatch { max_deviation });
    }
    Ok(LadderResult {
        coefficient,
        shifted_label: shifted,
    })
}

/// Label-level actions of K.k, L.k and the Hermitian combinations A(+-).k.
/// All shift rho by -i; the scalar is built from the boundary value of the
/// power-ladder coefficient, so A+ = K - L = power ladder at u = i and
/// A- = K + L annihilates every plane wave identically.
pub fn ladder_action_kla(
    label: &PlaneWaveLabel,
    kind: LadderKind,
) -> Result<LadderResult, QuantumError> {
    let a_plus = ladder_coefficient_continued(i_c(), label.rho)?;
    let coefficient = match kind {
        LadderKind::K => 0.5 * a_plus,
        LadderKind::L => -0.5 * a_plus,
        LadderKind::APlus => a_plus,
        LadderKind::AMinus => Complex64::new(0.0, 0.0),
    };
    Ok(LadderResult {
        coefficient,
        shifted_label: ShiftedLabel {
            k: label.k,
            rho: Complex64::new(label.rho, -1.0),
        },
    })
}

/// Real-shift ladder: rho -> rho - u with coefficient g(u, rho).
pub fn power_ladder(label: &PlaneWaveLabel, u: f64) -> Result<LadderResult, QuantumError> {
    let g = ladder_coefficient(u, label.rho)?;
    Ok(LadderResult {
        coefficient: g.value,
        shifted_label: ShiftedLabel {
            k: label.k,
            rho: Complex64::new(label.rho - u, 0.0),
        },
    })
}

/// Eigenvalue bookkeeping: H acts on a label as 1 + rho^2 exactly.
pub fn spectral_lambda(rho: f64) -> f64 {
    1.0 + rho * rho
}

/// Max relative residual of H psi = (1 + rho^2) psi over the points.
pub fn eigenvalue_residual(
    label: &PlaneWaveLabel,
    points: &[HyperPoint],
) -> Result<f64, QuantumError> {
    let psi = plane_wave(label);
    let h_psi = apply(&OperatorHandle::H, &psi)?;
    let lambda = spectral_lambda(label.rho);
    let mut worst = 0.0f64;
    for x in points {
        let v = psi.evaluate(x);
        let r = (h_psi.evaluate(x) - lambda * v).norm() / v.norm();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Residual of the radial equation (f^2 - m^2) psi'' + 3 f psi' + lambda psi
/// with lambda = 1 + rho^2, for the closed-form solution branch C1 = 1,
/// C2 = 0 (or f^(-1+i rho) when m^2 = 0), at the given arguments.
pub fn verify_radial_ode(rho: f64, m2: f64, points_f: &[f64]) -> Result<f64, QuantumError> {
    let lambda = Complex64::new(spectral_lambda(rho), 0.0);
    let s_exp = i_c() * rho;
    let mut worst = 0.0f64;
    for &f in points_f {
        if (f * f - m2).abs() < 1e-8 {
            return Err(QuantumError::Domain(f));
        }
        let t = CDual2::variable(f);
        let psi = if m2 == 0.0 {
            t.powc(Complex64::new(-1.0, rho))
        } else {
            let w = (t * t + CDual2::constant(Complex64::new(-m2, 0.0))).sqrt();
            (t + w).powc(s_exp) * w.recip()
        };
        let resid = (f * f - m2) * psi.d2 + 3.0 * f * psi.d1 + lambda * psi.v;
        worst = worst.max(resid.norm() / (1.0 + psi.v.norm()));
    }
    Ok(worst)
}

/// Deterministic labeled-sample generator for verification sweeps.
pub fn sample_labels(count: usize, seed: u64) -> Vec<PlaneWaveLabel> {
    use rand::{Rng, SeedableRng};
    let dirs = crate::geometry::sample_directions(count, seed ^ 0x9e3779b97f4a7c15);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    dirs.into_iter()
        .map(|n| {
            let omega = rng.gen_range(0.5..2.0);
            let mut rho: f64 = rng.gen_range(-5.0..5.0);
            if rho.abs() < 0.2 {
                rho = 0.2f64.copysign(rho + f64::MIN_POSITIVE);
            }
            PlaneWaveLabel {
                k: ConeVector::new(omega, n, -1).expect("sampled direction is unit"),
                rho,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pairing, sample_hyper_points};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn label(omega: f64, n: [f64; 3], rho: f64) -> PlaneWaveLabel {
        PlaneWaveLabel {
            k: ConeVector::new(omega, n, -1).unwrap(),
            rho,
        }
    }

    fn gaussian_pair() -> (WaveFunction, WaveFunction) {
        let phi = WaveFunction::from_closure(|s| {
            let r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
            let damp = (-r2).exp();
            damp * s[0].scale_re(0.5).add_scalar(c(1.0, 0.0))
        });
        let psi = WaveFunction::from_closure(|s| {
            let r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
            let damp = r2.scale_re(-0.7).exp();
            damp * (s[1] + s[2] * s[0].scale_re(0.3)).add_scalar(c(0.2, 0.1))
        });
        (phi, psi)
    }

    fn light_quad() -> QuadratureSpec {
        let mut q = QuadratureSpec::default();
        q.spherical_degree = 17;
        q.radial_order = 80;
        q.radial_cutoff = 6.0;
        q
    }

    #[test]
    fn plane_wave_basics() {
        let apex = HyperPoint::lift([0.0, 0.0, 0.0]);
        let l = label(1.0, [0.0, 0.0, 1.0], 1.3);
        let psi = plane_wave(&l);
        assert!((psi.evaluate(&apex) - c(1.0, 0.0)).norm() < 1e-15);

        // rho = 0 gives the real positive 1/q.
        let l0 = label(1.2, [0.6, 0.0, 0.8], 0.0);
        let psi0 = plane_wave(&l0);
        for x in sample_hyper_points(20, 5, 1.5) {
            let v = psi0.evaluate(&x);
            assert!(v.im.abs() < 1e-14 && v.re > 0.0);
            let q = pairing(&x, &l0.k).abs();
            assert!((v.re - 1.0 / q).abs() < 1e-13 / q);
        }

        // Unimodular rho-phase: |psi| = 1/q always.
        let l1 = label(0.8, [1.0, 2.0, -0.5], 2.7);
        let psi1 = plane_wave(&l1);
        for x in sample_hyper_points(100, 6, 2.0) {
            let q = pairing(&x, &l1.k).abs();
            assert!((psi1.evaluate(&x).norm() * q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn momentum_on_unit_function_closed_form() {
        let one = WaveFunction::from_closure(|_| Jet::constant(c(1.0, 0.0)));
        let p1 = apply(&OperatorHandle::P(1), &one).unwrap();
        for x in sample_hyper_points(25, 7, 1.2) {
            let s = x.spatial();
            let expected = c(0.0, 0.5) * s[0] / (1.0 + s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
            assert!((p1.evaluate(&x) - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn eigenvalue_law_on_random_labels() {
        let points = sample_hyper_points(4, 11, 1.5);
        let mut worst = 0.0f64;
        for l in sample_labels(50, 12) {
            worst = worst.max(eigenvalue_residual(&l, &points).unwrap());
        }
        assert!(worst < 1e-8, "worst eigenvalue residual {worst:e}");
    }

    #[test]
    fn spectral_label_bookkeeping_is_exact() {
        for rho in [0.5f64, -2.0, 3.25] {
            // H = 1 + h^2 at the label level, bitwise.
            assert_eq!(spectral_lambda(rho), 1.0 + rho * rho);
        }
        let l = label(1.0, [0.0, 1.0, 0.0], 2.0);
        let psi = plane_wave(&l);
        let h_psi = apply(&OperatorHandle::SpectralH, &psi).unwrap();
        let x = HyperPoint::lift([0.3, -0.2, 0.9]);
        assert!((h_psi.evaluate(&x) - 2.0 * psi.evaluate(&x)).norm() < 1e-15);
    }

    #[test]
    fn rotation_annihilates_radial_functions() {
        let radial = WaveFunction::from_closure(|s| {
            let r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
            (-r2).exp() + r2.scale_re(0.25)
        });
        let j12 = apply(&OperatorHandle::J(1, 2), &radial).unwrap();
        for x in sample_hyper_points(20, 21, 1.8) {
            assert!(j12.evaluate(&x).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_commutators() {
        let (_, psi) = gaussian_pair();
        let points = sample_hyper_points(10, 31, 1.4);
        // [J12, J23] = -i J13.
        let r = commutator_residual(
            &OperatorHandle::J(1, 2),
            &OperatorHandle::J(2, 3),
            &[(c(0.0, -1.0), OperatorHandle::J(1, 3))],
            &psi,
            &points,
        )
        .unwrap();
        assert!(r < 1e-8, "J-sector residual {r:e}");
        // Disjoint index pairs commute.
        let r = commutator_residual(
            &OperatorHandle::J(1, 2),
            &OperatorHandle::J(3, 4),
            &[],
            &psi,
            &points,
        )
        .unwrap();
        assert!(r < 1e-8, "disjoint pair residual {r:e}");
    }

    #[test]
    fn canonical_pair_commutator() {
        let (_, psi) = gaussian_pair();
        let points = sample_hyper_points(10, 41, 1.4);
        // [P1, X1] = -i.
        let r = commutator_residual(
            &OperatorHandle::P(1),
            &OperatorHandle::X(1),
            &[(c(0.0, -1.0), OperatorHandle::Identity)],
            &psi,
            &points,
        )
        .unwrap();
        assert!(r < 1e-10, "canonical pair residual {r:e}");
    }

    #[test]
    fn hermiticity_of_the_realized_operators() {
        let (phi, psi) = gaussian_pair();
        let quad = light_quad();
        let rx = hermiticity_residual(&OperatorHandle::X(1), &phi, &psi, &quad).unwrap();
        assert!(rx < 1e-10, "X1 residual {rx:e}");
        let rp = hermiticity_residual(&OperatorHandle::P(1), &phi, &psi, &quad).unwrap();
        assert!(rp < 1e-6, "P1 residual {rp:e}");
        let rh = hermiticity_residual(&OperatorHandle::H, &phi, &psi, &quad).unwrap();
        assert!(rh < 1e-5, "H residual {rh:e}");
    }

    #[test]
    fn t_ladder_shifts_rho_down() {
        let points = sample_hyper_points(50, 51, 1.6);
        let l = label(1.0, [0.0, 0.0, 1.0], 1.0);
        let r = ladder_action_t(&l, &points).unwrap();
        assert!((r.coefficient - c(-2.0, 1.0)).norm() < 1e-9);
        assert_eq!(r.shifted_label.rho, c(1.0, -1.0));

        let l0 = label(1.0, [1.0, 0.0, 0.0], 0.0);
        let r0 = ladder_action_t(&l0, &points).unwrap();
        assert!((r0.coefficient - c(0.0, 1.0)).norm() < 1e-9);

        let mut worst = 0.0f64;
        for rho in [-3.0, -1.0, -0.5, 0.5, 1.0, 3.0] {
            let l = label(1.4, [0.48, -0.6, 0.64], rho);
            let r = ladder_action_t(&l, &points).unwrap();
            let expected = c(-2.0 * rho, 1.0);
            worst = worst.max((r.coefficient - expected).norm() / expected.norm());
        }
        assert!(worst < 1e-8, "T coefficient worst relative error {worst:e}");
    }

    #[test]
    fn kla_actions_are_consistent() {
        let l = label(1.0, [0.6, 0.8, 0.0], 1.0);
        let k = ladder_action_kla(&l, LadderKind::K).unwrap();
        let lres = ladder_action_kla(&l, LadderKind::L).unwrap();
        let plus = ladder_action_kla(&l, LadderKind::APlus).unwrap();
        let minus = ladder_action_kla(&l, LadderKind::AMinus).unwrap();
        // A+ coefficient at rho = 1 is 2 sqrt(1 - i).
        let expected = 2.0 * c(1.0, -1.0).sqrt();
        assert!((plus.coefficient - expected).norm() < 1e-12);
        assert!((k.coefficient - lres.coefficient - plus.coefficient).norm() < 1e-14);
        assert!((k.coefficient + lres.coefficient - minus.coefficient).norm() < 1e-14);
        assert_eq!(minus.coefficient, c(0.0, 0.0));
    }

    #[test]
    fn annihilation_is_pointwise() {
        let l = label(1.1, [0.0, 0.6, 0.8], 1.7);
        let psi = plane_wave(&l);
        let a_minus = apply(&OperatorHandle::AMinusDotK, &psi).unwrap();
        for x in sample_hyper_points(100, 61, 1.9) {
            let bound = 1e-8 * psi.evaluate(&x).norm();
            assert!(a_minus.evaluate(&x).norm() <= bound);
        }
    }

    #[test]
    fn power_ladder_semigroup() {
        let l = label(1.0, [1.0, 0.0, 0.0], 2.3);
        let id = power_ladder(&l, 0.0).unwrap();
        assert_eq!(id.coefficient, c(1.0, 0.0));
        assert_eq!(id.shifted_label.rho, c(2.3, 0.0));

        let first = power_ladder(&l, 0.5).unwrap();
        let second = power_ladder(
            &PlaneWaveLabel {
                k: l.k,
                rho: first.shifted_label.rho.re,
            },
            0.5,
        )
        .unwrap();
        let whole = power_ladder(&l, 1.0).unwrap();
        let composed = first.coefficient * second.coefficient;
        assert!((composed - whole.coefficient).norm() < 1e-10);
        assert_eq!(second.shifted_label.rho, whole.shifted_label.rho);

        // Formal continuation u = i lands on the A+ coefficient.
        let cont = ladder_coefficient_continued(c(0.0, 1.0), 2.3).unwrap();
        let a_plus = ladder_action_kla(&l, LadderKind::APlus).unwrap();
        assert!((cont - a_plus.coefficient).norm() < 1e-14);
    }

    #[test]
    fn radial_equation_closed_forms() {
        let grid: Vec<f64> = (0..30).map(|j| 2.0 + 8.0 * j as f64 / 29.0).collect();
        let r0 = verify_radial_ode(1.4, 0.0, &grid).unwrap();
        assert!(r0 < 1e-10, "m2 = 0 residual {r0:e}");
        let r1 = verify_radial_ode(0.9, 1.0, &grid).unwrap();
        assert!(r1 < 1e-9, "m2 = 1 residual {r1:e}");
        let rm = verify_radial_ode(2.2, -1.0, &grid).unwrap();
        assert!(rm < 1e-9, "m2 = -1 residual {rm:e}");
        assert_eq!(spectral_lambda(2.0), 5.0);
        assert!(matches!(
            verify_radial_ode(1.0, 4.0, &[2.0]),
            Err(QuantumError::Domain(_))
        ));
    }

    #[test]
    fn order_budget_is_enforced() {
        let l = label(1.0, [0.0, 0.0, 1.0], 1.0);
        let psi = plane_wave(&l);
        let once = apply(&OperatorHandle::H, &psi).unwrap();
        let twice = apply(&OperatorHandle::H, &once).unwrap();
        assert_eq!(twice.order, 0);
        assert!(matches!(
            apply(&OperatorHandle::H, &twice),
            Err(QuantumError::InsufficientOrder { .. })
        ));
    }

    #[test]
    fn derivatives_cross_checked_by_finite_differences() {
        let l = label(1.3, [0.2, -1.0, 0.4], 0.8);
        let psi = plane_wave(&l);
        let h_psi = apply(&OperatorHandle::H, &psi).unwrap();
        let x = [0.4, 0.1, -0.3];
        let h = 1e-4;
        let eval = |p: [f64; 3]| psi.evaluate(&HyperPoint::lift(p));
        // Build H psi from central differences of psi alone.
        let mut lap = Complex64::new(0.0, 0.0);
        let f0 = eval(x);
        let mut grad = [Complex64::new(0.0, 0.0); 3];
        let mut hess = [[Complex64::new(0.0, 0.0); 3]; 3];
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            grad[a] = (eval(xp) - eval(xm)) / (2.0 * h);
            hess[a][a] = (eval(xp) - 2.0 * f0 + eval(xm)) / (h * h);
        }
        for a in 0..3 {
            for b in (a + 1)..3 {
                let mut pp = x;
                let mut pm = x;
                let mut mp = x;
                let mut mm = x;
                pp[a] += h;
                pp[b] += h;
                pm[a] += h;
                pm[b] -= h;
                mp[a] -= h;
                mp[b] += h;
                mm[a] -= h;
                mm[b] -= h;
                hess[a][b] = (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (4.0 * h * h);
                hess[b][a] = hess[a][b];
            }
        }
        for a in 0..3 {
            lap += hess[a][a];
            for b in 0..3 {
                lap += x[a] * x[b] * hess[a][b];
            }
            lap += 3.0 * x[a] * grad[a];
        }
        let fd = -lap;
        let exact = h_psi.evaluate(&HyperPoint::lift(x));
        assert!(
            (fd - exact).norm() < 1e-5 * (1.0 + exact.norm()),
            "fd {fd} vs jet {exact}"
        );
    }
}
