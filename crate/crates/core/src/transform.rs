//! Analysis-synthesis pair for functions on the hyperboloid: forward
//! transform to spectral data phi(n, rho), cone-supported integral
//! transforms (delta-surface integral and Mellin machinery), the inverse
//! expansion, and round-trip / norm checks.
//!
//! The forward transform reduces the angular integral exactly: the kernel
//! q^(-1+i rho) depends on the direction of x only through t = x.n/|x_s|,
//! so expanding it in Legendre coefficients K_l(rho, r) and pairing those
//! with the spherical-harmonic coefficients of f turns the 3d oscillatory
//! integral into resolved 1d quadratures. A direct product-rule evaluation
//! aliases once the phase swing of rho ln q across the sphere exceeds the
//! rule's resolving degree, which happens well inside the default rho
//! window; the factorized path has no such floor. `forward_at` keeps a
//! brute-force single-point evaluator with an adaptively raised degree for
//! cross-validation.
//!
//! All sums run in a fixed sequential order, so results are bit-reproducible
//! for a fixed quadrature spec.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{ConeVector, HyperPoint};
use crate::quad::{gauss_legendre, QuadratureSpec, SphereNode, SphereRule};

/// Cap on the angular bandlimit of the harmonic reduction; inputs with
/// spherical content above the working degree are projected onto it.
const BANDLIMIT_CAP: usize = 27;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("radial truncation too aggressive: tail estimate {tail:e}, suggested cutoff {suggested_r}")]
    Truncation { tail: f64, suggested_r: f64 },
    #[error("ray integration failed: {0}")]
    RayDivergence(String),
    #[error("numerical differentiation too noisy: spread {spread:e}")]
    DifferentiationNoise { spread: f64 },
    #[error("bad input: {0}")]
    BadInput(String),
}

/// Value plus non-fatal diagnostics accumulated during the computation.
#[derive(Debug, Clone)]
pub struct WithWarnings<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> WithWarnings<T> {
    fn clean(value: T) -> Self {
        WithWarnings {
            value,
            warnings: Vec::new(),
        }
    }
}

/// Decay classification used to pick truncation radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// |f(x)| <= c exp(-|x|^2 / s^2).
    GaussianDamped { c: f64, s: f64 },
    Compact { radius: f64 },
    Generic,
}

#[derive(Clone)]
pub struct HyperFunction {
    pub eval: Arc<dyn Fn(&HyperPoint) -> Complex64 + Send + Sync>,
    pub decay: DecayClass,
    /// True when the function is known to be real-valued; enables the
    /// conjugate-symmetry shortcut in the inverse expansion.
    pub real_valued: bool,
}

impl HyperFunction {
    pub fn new<F>(f: F, decay: DecayClass, real_valued: bool) -> Self
    where
        F: Fn(&HyperPoint) -> Complex64 + Send + Sync + 'static,
    {
        HyperFunction {
            eval: Arc::new(f),
            decay,
            real_valued,
        }
    }

    pub fn at(&self, x: &HyperPoint) -> Complex64 {
        (self.eval)(x)
    }
}

/// Function on the forward cone, sampled through the section
/// k = t (n, -1); `support` bounds the section parameter t along rays.
#[derive(Clone)]
pub struct ConeFunction {
    pub eval: Arc<dyn Fn(f64, [f64; 3]) -> Complex64 + Send + Sync>,
    pub support: (f64, f64),
}

impl ConeFunction {
    pub fn at(&self, t: f64, n: [f64; 3]) -> Complex64 {
        (self.eval)(t, n)
    }
}

/// Spectral data on the product grid (sphere nodes) x (uniform rho grid),
/// stored on the unit section; cone values follow by homogeneity of degree
/// -1 + i rho.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub rule_id: String,
    pub nodes: Vec<SphereNode>,
    pub rho: Vec<f64>,
    /// values[j][m] = phi(n_j, rho_m).
    pub values: Vec<Vec<Complex64>>,
    pub sigma: i8,
    pub phase_convention: String,
    pub real_source: bool,
}

impl SpectralFunction {
    pub fn rho_spacing(&self) -> f64 {
        self.rho[1] - self.rho[0]
    }

    /// Extension off the unit section: phi(t k) = t^(-1+i rho) phi(k).
    pub fn on_cone(&self, j: usize, m: usize, t: f64) -> Complex64 {
        self.values[j][m] * q_pow(t, Complex64::new(-1.0, self.rho[m]))
    }

    /// Fraction of the spectral mass rho^2 |phi|^2 in the outer 10% of the
    /// rho window; a proxy for window truncation.
    pub fn tail_mass_fraction(&self) -> f64 {
        let p = self.rho.last().copied().unwrap_or(0.0).abs();
        let edge = 0.9 * p;
        let mut tail = 0.0;
        let mut total = 0.0;
        for row in &self.values {
            for (m, v) in row.iter().enumerate() {
                let mass = self.rho[m] * self.rho[m] * v.norm_sqr();
                total += mass;
                if self.rho[m].abs() >= edge {
                    tail += mass;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let rho_min = self.rho.first().copied().unwrap_or(0.0);
        let rho_max = self.rho.last().copied().unwrap_or(0.0);
        out.push_str(&format!(
            "# rule={} nodes={} rho_min={} rho_max={} rho_count={} sigma={} phase={} real_source={}\n",
            self.rule_id,
            self.nodes.len(),
            rho_min,
            rho_max,
            self.rho.len(),
            self.sigma,
            self.phase_convention,
            self.real_source
        ));
        out.push_str("j,m,n_x,n_y,n_z,weight,rho,re_phi,im_phi\n");
        for (j, node) in self.nodes.iter().enumerate() {
            for (m, rho) in self.rho.iter().enumerate() {
                let v = self.values[j][m];
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    j, m, node.dir[0], node.dir[1], node.dir[2], node.weight, rho, v.re, v.im
                ));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<SpectralFunction, TransformError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| TransformError::BadInput("empty file".into()))?;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| TransformError::BadInput("missing header".into()))?;
        let mut rule_id = String::new();
        let mut node_count = 0usize;
        let mut rho_count = 0usize;
        let mut sigma = -1i8;
        let mut phase = String::new();
        let mut real_source = false;
        for field in header.split_whitespace() {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| TransformError::BadInput(format!("bad header field {field}")))?;
            match key {
                "rule" => rule_id = val.to_string(),
                "nodes" => node_count = val.parse().map_err(bad)?,
                "rho_count" => rho_count = val.parse().map_err(bad)?,
                "sigma" => sigma = val.parse().map_err(bad)?,
                "phase" => phase = val.to_string(),
                "real_source" => real_source = val.parse().map_err(bad)?,
                "rho_min" | "rho_max" => {}
                _ => return Err(TransformError::BadInput(format!("unknown header key {key}"))),
            }
        }
        let col_header = lines.next();
        if col_header != Some("j,m,n_x,n_y,n_z,weight,rho,re_phi,im_phi") {
            return Err(TransformError::BadInput("missing column header".into()));
        }
        let mut nodes = vec![
            SphereNode {
                dir: [0.0; 3],
                weight: 0.0
            };
            node_count
        ];
        let mut rho = vec![0.0f64; rho_count];
        let mut values = vec![vec![Complex64::new(0.0, 0.0); rho_count]; node_count];
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || {
                parts
                    .next()
                    .ok_or_else(|| TransformError::BadInput(format!("short row: {line}")))
            };
            let j: usize = next()?.parse().map_err(bad)?;
            let m: usize = next()?.parse().map_err(bad)?;
            let nx: f64 = next()?.parse().map_err(bad)?;
            let ny: f64 = next()?.parse().map_err(bad)?;
            let nz: f64 = next()?.parse().map_err(bad)?;
            let w: f64 = next()?.parse().map_err(bad)?;
            let r: f64 = next()?.parse().map_err(bad)?;
            let re: f64 = next()?.parse().map_err(bad)?;
            let im: f64 = next()?.parse().map_err(bad)?;
            if j >= node_count || m >= rho_count {
                return Err(TransformError::BadInput(format!("index out of range: {line}")));
            }
            nodes[j] = SphereNode {
                dir: [nx, ny, nz],
                weight: w,
            };
            rho[m] = r;
            values[j][m] = Complex64::new(re, im);
        }
        Ok(SpectralFunction {
            rule_id,
            nodes,
            rho,
            values,
            sigma,
            phase_convention: phase,
            real_source,
        })
    }
}

fn bad<E: std::fmt::Display>(e: E) -> TransformError {
    TransformError::BadInput(e.to_string())
}

fn inversion_constant() -> f64 {
    let pi = std::f64::consts::PI;
    1.0 / (16.0 * pi * pi * pi)
}

/// Truncation radius for the chart quadrature, from the decay tag capped by
/// the spec's cutoff.
fn effective_radius(f: &HyperFunction, quad: &QuadratureSpec) -> f64 {
    let tag = match f.decay {
        DecayClass::GaussianDamped { s, .. } => 6.0 * s,
        DecayClass::Compact { radius } => radius,
        DecayClass::Generic => quad.radial_cutoff,
    };
    tag.min(quad.radial_cutoff)
}

/// Upper bound for the invariant-measure mass of |f| beyond radius r.
fn tail_estimate(f: &HyperFunction, r: f64) -> Option<(f64, f64)> {
    match f.decay {
        DecayClass::GaussianDamped { c, s } => {
            let tail = 4.0 * std::f64::consts::PI * c * 0.5 * s * s * (-r * r / (s * s)).exp();
            Some((tail, 6.0 * s))
        }
        DecayClass::Compact { radius } => {
            if r + 1e-12 >= radius {
                Some((0.0, radius))
            } else {
                Some((1.0, radius))
            }
        }
        DecayClass::Generic => None,
    }
}

/// Pairing on the unit section: q(x, n) = x.n + x4 > 0.
fn q_unit(x: &HyperPoint, n: [f64; 3]) -> f64 {
    let s = x.spatial();
    s[0] * n[0] + s[1] * n[1] + s[2] * n[2] + x.x4()
}

/// q^s for q > 0 through the principal logarithm.
fn q_pow(q: f64, s: Complex64) -> Complex64 {
    (s * q.ln()).exp()
}

/// Real orthonormal spherical harmonics at one direction, packed as
/// idx = l^2 for m = 0, then l^2 + 2m - 1 / l^2 + 2m for the cosine / sine
/// branches. No Condon-Shortley sign; analysis and synthesis share the
/// table, so any consistent convention cancels.
fn real_harmonic_row(l_max: usize, dir: [f64; 3], out: &mut [f64]) {
    let ct = dir[2].clamp(-1.0, 1.0);
    let st = (1.0 - ct * ct).max(0.0).sqrt();
    let (cphi, sphi) = if st < 1e-300 {
        (1.0, 0.0)
    } else {
        (dir[0] / st, dir[1] / st)
    };
    let sqrt2 = std::f64::consts::SQRT_2;
    // cos(m phi), sin(m phi) by angle addition.
    let mut cm = vec![0.0; l_max + 1];
    let mut sm = vec![0.0; l_max + 1];
    cm[0] = 1.0;
    for m in 1..=l_max {
        cm[m] = cm[m - 1] * cphi - sm[m - 1] * sphi;
        sm[m] = sm[m - 1] * cphi + cm[m - 1] * sphi;
    }
    // Normalized associated Legendre values: sectoral seed, then upward in l.
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= ((2.0 * m as f64 + 1.0) / (2.0 * m as f64)).sqrt() * st;
        }
        let mut p_prev = 0.0;
        let mut p_curr = pmm;
        for l in m..=l_max {
            if l > m {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = if l == m + 1 {
                    0.0
                } else {
                    ((2.0 * lf + 1.0) * ((lf - 1.0) * (lf - 1.0) - mf * mf)
                        / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
                        .sqrt()
                };
                let p_next = a * ct * p_curr - b * p_prev;
                p_prev = p_curr;
                p_curr = p_next;
            }
            if m == 0 {
                out[l * l] = p_curr;
            } else {
                out[l * l + 2 * m - 1] = sqrt2 * p_curr * cm[m];
                out[l * l + 2 * m] = sqrt2 * p_curr * sm[m];
            }
        }
    }
}

fn harmonic_table(l_max: usize, nodes: &[SphereNode]) -> Vec<f64> {
    let n_coef = (l_max + 1) * (l_max + 1);
    let mut table = vec![0.0; nodes.len() * n_coef];
    for (i, node) in nodes.iter().enumerate() {
        real_harmonic_row(l_max, node.dir, &mut table[i * n_coef..(i + 1) * n_coef]);
    }
    table
}

/// Forward transform phi(n, rho) = int Dx f(x) q(x, n)^(-1 + i rho) through
/// the harmonic reduction
/// phi(n, rho) = 2 pi sum_lm S_lm(n) int dr c(r) K_l(rho, r) f_lm(r),
/// K_l(rho, r) = int_-1^1 P_l(t) (x4 + r t)^(-1 + i rho) dt,
/// with the t-rule sized for the worst phase swing 2 rho_max asinh(r).
pub fn forward_transform(
    f: &HyperFunction,
    quad: &QuadratureSpec,
) -> Result<WithWarnings<SpectralFunction>, TransformError> {
    let out_rule = quad.sphere_rule();
    let r_eff = effective_radius(f, quad);
    let n_r = (quad.radial_order / 2).max(96);
    let (rs, ws) = gauss_legendre(n_r, 0.0, r_eff);
    let rho = quad.rho_grid();
    let nm = rho.len();
    let drho = rho[1] - rho[0];
    // Matching the storage rule keeps the stored samples integrable by that
    // rule; harmonics above its degree would alias in the inverse.
    let l_max = quad.spherical_degree.min(BANDLIMIT_CAP);
    let n_coef = (l_max + 1) * (l_max + 1);

    let analysis = SphereRule::with_exactness(2 * l_max + 1);
    let s_analysis = harmonic_table(l_max, &analysis.nodes);
    let s_out = harmonic_table(l_max, &out_rule.nodes);

    // Mirror pairing: rho[nm-1-k] = -rho[k]; sweep the non-negative half and
    // fill the reflected slot with the conjugate kernel.
    let m_zero = nm / 2;
    let n_half = nm - m_zero;
    let rho_start = rho[m_zero];

    let mut d = vec![Complex64::new(0.0, 0.0); n_coef * nm];
    let mut flm = vec![Complex64::new(0.0, 0.0); n_coef];
    let mut klr = vec![Complex64::new(0.0, 0.0); n_half * (l_max + 1)];
    let mut pl = vec![0.0f64; l_max + 1];
    let mut norm_sq = 0.0f64;

    for (&r, &w_r) in rs.iter().zip(ws.iter()) {
        let x4 = (1.0 + r * r).sqrt();
        let cr = w_r * r * r / x4;

        // Spherical-harmonic analysis of f on the shell of chart radius r.
        flm.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (i, node) in analysis.nodes.iter().enumerate() {
            let x = HyperPoint::lift([node.dir[0] * r, node.dir[1] * r, node.dir[2] * r]);
            let fv = f.at(&x);
            norm_sq += node.weight * cr * fv.norm_sqr();
            if fv.norm_sqr() == 0.0 {
                continue;
            }
            let row = &s_analysis[i * n_coef..(i + 1) * n_coef];
            let wfv = node.weight * fv;
            for (slot, &s) in flm.iter_mut().zip(row.iter()) {
                *slot += s * wfv;
            }
        }

        // Legendre kernel coefficients on the non-negative rho half-grid.
        let d_r = r.asinh();
        let n_t = 48 + l_max + (1.6 * quad.rho_max * d_r).ceil() as usize;
        let (ts, wt) = gauss_legendre(n_t, -1.0, 1.0);
        klr.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (&t, &w_t) in ts.iter().zip(wt.iter()) {
            let q = x4 + r * t;
            let lq = q.ln();
            pl[0] = 1.0;
            if l_max >= 1 {
                pl[1] = t;
            }
            for l in 2..=l_max {
                let lf = l as f64;
                pl[l] = ((2.0 * lf - 1.0) * t * pl[l - 1] - (lf - 1.0) * pl[l - 2]) / lf;
            }
            let mut phase = Complex64::new(0.0, rho_start * lq).exp() * (w_t / q);
            let step = Complex64::new(0.0, drho * lq).exp();
            for k in 0..n_half {
                let row = &mut klr[k * (l_max + 1)..(k + 1) * (l_max + 1)];
                for (slot, &p) in row.iter_mut().zip(pl.iter()) {
                    *slot += p * phase;
                }
                phase *= step;
            }
        }

        // Stream the radial contraction into D_lm(rho).
        for l in 0..=l_max {
            for idx in (l * l)..((l + 1) * (l + 1)) {
                let cf = cr * flm[idx];
                if cf.norm_sqr() == 0.0 {
                    continue;
                }
                let base = idx * nm;
                for k in 0..n_half {
                    let kern = klr[k * (l_max + 1) + l];
                    let m_pos = m_zero + k;
                    let m_neg = nm - 1 - m_pos;
                    d[base + m_pos] += cf * kern;
                    if m_neg != m_pos {
                        d[base + m_neg] += cf * kern.conj();
                    }
                }
            }
        }
    }

    if let Some((tail, suggested_r)) = tail_estimate(f, r_eff) {
        let norm = norm_sq.sqrt().max(1e-300);
        if tail > 1e-3 * norm {
            return Err(TransformError::Truncation { tail, suggested_r });
        }
    }

    // Synthesis at the stored direction grid.
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut values = vec![vec![Complex64::new(0.0, 0.0); nm]; out_rule.nodes.len()];
    for (j, row) in values.iter_mut().enumerate() {
        let srow = &s_out[j * n_coef..(j + 1) * n_coef];
        for (idx, &s) in srow.iter().enumerate() {
            let scale = two_pi * s;
            let base = idx * nm;
            for (m, slot) in row.iter_mut().enumerate() {
                *slot += scale * d[base + m];
            }
        }
    }

    Ok(WithWarnings::clean(SpectralFunction {
        rule_id: out_rule.id.clone(),
        nodes: out_rule.nodes,
        rho,
        values,
        sigma: -1,
        phase_convention: "principal-log".into(),
        real_source: f.real_valued,
    }))
}

/// Brute-force spectral value at a single (n, rho) by product quadrature,
/// with the spherical degree raised until the kernel oscillation is
/// resolved. Cross-validation path for `forward_transform`.
pub fn forward_at(
    f: &HyperFunction,
    n: [f64; 3],
    rho: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64, TransformError> {
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if len < 1e-300 {
        return Err(TransformError::BadInput("zero direction".into()));
    }
    let n = [n[0] / len, n[1] / len, n[2] / len];
    let r_eff = effective_radius(f, quad);
    let degree = quad
        .spherical_degree
        .max(29)
        .max((1.8 * rho.abs() * r_eff.asinh()) as usize + 12);
    let sphere = SphereRule::with_exactness(degree);
    let (rs, ws) = gauss_legendre(quad.radial_order.max(64), 0.0, r_eff);
    let s = Complex64::new(-1.0, rho);
    let mut acc = Complex64::new(0.0, 0.0);
    for node in &sphere.nodes {
        for (&r, &wr) in rs.iter().zip(ws.iter()) {
            let x = HyperPoint::lift([node.dir[0] * r, node.dir[1] * r, node.dir[2] * r]);
            acc += node.weight * wr * r * r / x.x4() * f.at(&x) * q_pow(q_unit(&x, n), s);
        }
    }
    Ok(acc)
}

/// Inverse expansion at one point:
/// f(x) = (1/16 pi^3) int drho rho^2 int dn phi(n, rho) q(x, n)^(-1-i rho).
pub fn inverse_transform(phi: &SpectralFunction, x: &HyperPoint) -> WithWarnings<Complex64> {
    let mut out = WithWarnings::clean(inverse_kernel(phi, x));
    let tail = phi.tail_mass_fraction();
    if tail > 1e-3 {
        out.warnings
            .push(format!("spectral window truncation: tail mass fraction {tail:e}"));
    }
    out
}

fn inverse_kernel(phi: &SpectralFunction, x: &HyperPoint) -> Complex64 {
    let nm = phi.rho.len();
    let drho = phi.rho_spacing();
    let trap = |m: usize| -> f64 {
        if m == 0 || m + 1 == nm {
            0.5 * drho
        } else {
            drho
        }
    };
    let mut acc = Complex64::new(0.0, 0.0);
    if phi.real_source {
        // Conjugate-symmetry shortcut: fold the negative half onto the
        // positive one; the rho = 0 slot carries zero weight anyway.
        let m_start = match phi.rho.iter().position(|&r| r > 0.0) {
            Some(m) => m,
            None => return Complex64::new(0.0, 0.0),
        };
        let mut acc_re = 0.0;
        for (j, node) in phi.nodes.iter().enumerate() {
            let q = q_unit(x, node.dir);
            let lq = q.ln();
            let mut phase = Complex64::new(0.0, -phi.rho[m_start] * lq).exp() * (node.weight / q);
            let step = Complex64::new(0.0, -drho * lq).exp();
            for m in m_start..nm {
                let rho = phi.rho[m];
                let term = phi.values[j][m] * phase;
                acc_re += trap(m) * rho * rho * term.re;
                phase *= step;
            }
        }
        acc = Complex64::new(2.0 * acc_re, 0.0);
    } else {
        for (j, node) in phi.nodes.iter().enumerate() {
            let q = q_unit(x, node.dir);
            let lq = q.ln();
            let mut phase = Complex64::new(0.0, -phi.rho[0] * lq).exp();
            let step = Complex64::new(0.0, -drho * lq).exp();
            for m in 0..nm {
                let rho = phi.rho[m];
                acc += node.weight * trap(m) * rho * rho * phi.values[j][m] * phase / q;
                phase *= step;
            }
        }
    }
    acc * inversion_constant()
}

/// Batched inverse with the truncation warning emitted once.
pub fn reconstruct(phi: &SpectralFunction, points: &[HyperPoint]) -> WithWarnings<Vec<Complex64>> {
    let values = points.iter().map(|x| inverse_kernel(phi, x)).collect();
    let mut out = WithWarnings::clean(values);
    let tail = phi.tail_mass_fraction();
    if tail > 1e-3 {
        out.warnings
            .push(format!("spectral window truncation: tail mass fraction {tail:e}"));
    }
    out
}

/// Radius of the ball carrying essentially all of the squared norm; the
/// omitted fraction is below 1e-7 for the gaussian tag.
fn support_radius(f: &HyperFunction, quad: &QuadratureSpec) -> f64 {
    let tag = match f.decay {
        DecayClass::GaussianDamped { s, .. } => 3.0 * s,
        DecayClass::Compact { radius } => radius,
        DecayClass::Generic => quad.radial_cutoff,
    };
    tag.min(quad.radial_cutoff)
}

/// Relative L2(Dx) error of inverse(forward(f)) against f, measured on a
/// product grid over the support ball, sized by
/// `eval_sphere_degree`/`eval_radial_order`.
pub fn roundtrip_l2_error(
    f: &HyperFunction,
    quad: &QuadratureSpec,
    eval_sphere_degree: usize,
    eval_radial_order: usize,
) -> Result<WithWarnings<f64>, TransformError> {
    let phi = forward_transform(f, quad)?;
    let sphere = SphereRule::with_exactness(eval_sphere_degree);
    let r_eff = support_radius(f, quad);
    let (rs, ws) = gauss_legendre(eval_radial_order, 0.0, r_eff);
    let mut points = Vec::with_capacity(sphere.nodes.len() * rs.len());
    let mut weights = Vec::with_capacity(sphere.nodes.len() * rs.len());
    for node in &sphere.nodes {
        for (&r, &wr) in rs.iter().zip(ws.iter()) {
            let x = HyperPoint::lift([node.dir[0] * r, node.dir[1] * r, node.dir[2] * r]);
            weights.push(node.weight * wr * r * r / x.x4());
            points.push(x);
        }
    }
    let rec = reconstruct(&phi.value, &points);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((x, w), fhat) in points.iter().zip(weights.iter()).zip(rec.value.iter()) {
        let fv = f.at(x);
        num += w * (fv - fhat).norm_sqr();
        den += w * fv.norm_sqr();
    }
    let mut out = WithWarnings::clean((num / den).sqrt());
    out.warnings = rec.warnings;
    Ok(out)
}

/// Norm comparison: lhs = int Dx |f|^2 against
/// rhs = (1/16 pi^3) int drho rho^2 int dn |phi(n, rho)|^2.
#[derive(Debug, Clone, Copy)]
pub struct PlancherelReport {
    pub lhs: f64,
    pub rhs: f64,
    /// rhs / lhs; the binding contract is its constancy across inputs.
    pub ratio: f64,
}

pub fn plancherel_check(
    f: &HyperFunction,
    quad: &QuadratureSpec,
) -> Result<WithWarnings<PlancherelReport>, TransformError> {
    let phi = forward_transform(f, quad)?;
    let sphere = quad.sphere_rule();
    let r_eff = effective_radius(f, quad);
    let (rs, ws) = gauss_legendre(quad.radial_order, 0.0, r_eff);
    let mut lhs = 0.0;
    for node in &sphere.nodes {
        for (&r, &wr) in rs.iter().zip(ws.iter()) {
            let x = HyperPoint::lift([node.dir[0] * r, node.dir[1] * r, node.dir[2] * r]);
            lhs += node.weight * wr * r * r / x.x4() * f.at(&x).norm_sqr();
        }
    }
    let spectral = &phi.value;
    let nm = spectral.rho.len();
    let drho = spectral.rho_spacing();
    let mut rhs = 0.0;
    for (j, node) in spectral.nodes.iter().enumerate() {
        for m in 0..nm {
            let w = if m == 0 || m + 1 == nm { 0.5 * drho } else { drho };
            let rho = spectral.rho[m];
            rhs += node.weight * w * rho * rho * spectral.values[j][m].norm_sqr();
        }
    }
    rhs *= inversion_constant();
    let mut out = WithWarnings::clean(PlancherelReport {
        lhs,
        rhs,
        ratio: rhs / lhs,
    });
    out.warnings = phi.warnings;
    let tail = spectral.tail_mass_fraction();
    if tail > 1e-3 {
        out.warnings
            .push(format!("spectral window truncation: tail mass fraction {tail:e}"));
    }
    Ok(out)
}

/// Surface integral h(k) = int Dx f(x) delta(x.k - 1).
///
/// With k = omega (n, -1) and c = 1/omega, the support surface
/// x.n + x4 = c flattens in coordinates y of the plane orthogonal to n:
/// x = u(y) n + y with u = (c^2 - 1 - |y|^2) / (2c), and the induced density
/// is the flat d^2y divided by the level. Quadrature: polar in y (radial
/// Gauss-Legendre x uniform azimuth).
pub fn gelfand_graev(
    f: &HyperFunction,
    k: &ConeVector,
    quad: &QuadratureSpec,
) -> Result<WithWarnings<Complex64>, TransformError> {
    gg_at_level(f, k, 1.0, quad)
}

/// h_level(k; a) = int Dx f(x) delta(x.k - a); gelfand_graev is level 1 and
/// the scaling identity h(t k) = (1/t) h_level(k; 1/t) gives a second path.
pub fn gg_at_level(
    f: &HyperFunction,
    k: &ConeVector,
    level: f64,
    quad: &QuadratureSpec,
) -> Result<WithWarnings<Complex64>, TransformError> {
    if k.sigma != -1 {
        return Err(TransformError::BadInput(
            "delta-surface integral needs the sigma = -1 section".into(),
        ));
    }
    if level <= 0.0 {
        return Err(TransformError::BadInput(format!(
            "surface level must be positive, got {level}"
        )));
    }
    let c = level / k.omega;
    let r_max = match f.decay {
        DecayClass::GaussianDamped { s, .. } => 6.0 * s,
        DecayClass::Compact { radius } => radius,
        DecayClass::Generic => quad.radial_cutoff,
    };
    let mut warnings = Vec::new();
    // Nearest surface point to the chart origin sits at y = 0.
    let min_dist = (c * c - 1.0).abs() / (2.0 * c);
    if min_dist > r_max {
        warnings.push(format!(
            "support surface (distance {min_dist:.3}) misses the decay ball (radius {r_max:.3})"
        ));
        return Ok(WithWarnings {
            value: Complex64::new(0.0, 0.0),
            warnings,
        });
    }
    // |x_s|^2 = u^2 + v^2 <= r_max^2 bounds the y-radius v.
    let v_max = r_max;
    let (e1, e2) = orthonormal_pair(k.n);
    let radial = quad.radial_order.clamp(32, 120);
    let (vs, wv) = gauss_legendre(radial, 0.0, v_max);
    let n_phi = 64;
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&v, &w) in vs.iter().zip(wv.iter()) {
        let u = (c * c - 1.0 - v * v) / (2.0 * c);
        if u * u + v * v > r_max * r_max {
            continue;
        }
        for p in 0..n_phi {
            let ang = dphi * p as f64;
            let (sa, ca) = ang.sin_cos();
            let yx = v * (ca * e1[0] + sa * e2[0]);
            let yy = v * (ca * e1[1] + sa * e2[1]);
            let yz = v * (ca * e1[2] + sa * e2[2]);
            let x = HyperPoint::lift([u * k.n[0] + yx, u * k.n[1] + yy, u * k.n[2] + yz]);
            acc += w * v * dphi * f.at(&x);
        }
    }
    Ok(WithWarnings {
        value: acc / level,
        warnings,
    })
}

fn orthonormal_pair(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pick = if n[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut e1 = [
        pick[1] * n[2] - pick[2] * n[1],
        pick[2] * n[0] - pick[0] * n[2],
        pick[0] * n[1] - pick[1] * n[0],
    ];
    let len = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for e in &mut e1 {
        *e /= len;
    }
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    (e1, e2)
}

/// Wraps the delta-surface integral of `f` as a cone function, with ray
/// support computed from the decay radius.
pub fn cone_section_of(f: &HyperFunction, quad: &QuadratureSpec) -> ConeFunction {
    let r_max = match f.decay {
        DecayClass::GaussianDamped { s, .. } => 6.0 * s,
        DecayClass::Compact { radius } => radius,
        DecayClass::Generic => quad.radial_cutoff,
    };
    let lo = 1.0 / ((r_max * r_max + 1.0).sqrt() + r_max);
    let hi = 1.0 / ((r_max * r_max + 1.0).sqrt() - r_max);
    let f = f.clone();
    let quad = quad.clone();
    ConeFunction {
        eval: Arc::new(move |t: f64, n: [f64; 3]| {
            let k = ConeVector::new(t, n, -1).expect("positive ray parameter");
            gelfand_graev(&f, &k, &quad)
                .map(|w| w.value)
                .unwrap_or(Complex64::new(0.0, 0.0))
        }),
        support: (lo, hi),
    }
}

/// Mellin transform along a ray: int_0^inf dt h(t (n,-1)) t^(-i rho),
/// computed in the log variable on the stored support window.
pub fn mellin(
    hfun: &ConeFunction,
    n: [f64; 3],
    rho: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64, TransformError> {
    Ok(mellin_on_grid(hfun, n, &[rho], quad)?[0])
}

/// Shared-sample Mellin sweep over many rho values.
pub fn mellin_on_grid(
    hfun: &ConeFunction,
    n: [f64; 3],
    rhos: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<Complex64>, TransformError> {
    let (lo, hi) = hfun.support;
    if !(lo > 0.0 && hi > lo) {
        return Err(TransformError::BadInput(format!(
            "bad ray support ({lo}, {hi})"
        )));
    }
    let order = (2 * quad.radial_order).clamp(64, 400);
    let (taus, wt) = gauss_legendre(order, lo.ln(), hi.ln());
    let samples: Vec<Complex64> = taus.iter().map(|&t| hfun.at(t.exp(), n)).collect();
    if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
        return Err(TransformError::RayDivergence(
            "non-finite ray sample".into(),
        ));
    }
    let mut out = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&tau, &w), &h) in taus.iter().zip(wt.iter()).zip(samples.iter()) {
            // dt = e^tau dtau and t^(-i rho) = exp(-i rho tau).
            acc += w * h * Complex64::new(tau, -rho * tau).exp();
        }
        out.push(acc);
    }
    Ok(out)
}

/// Reconstruction through the delta'' inverse:
/// f(x) = -(1/8 pi^2) int Dk h(k) delta''(x.k - 1).
///
/// The scaling change of variables t = omega q and the pairing against
/// delta''(t - 1) are done analytically, leaving
/// f(x) = -(1/8 pi^2) int dn [ 2 H'(1/q) / q^3 + H''(1/q) / q^4 ]
/// with H the ray restriction of h; the ray derivatives use five-point
/// stencils, cross-checked at two steps to detect differentiation noise.
pub fn double_inverse_gg(
    hfun: &ConeFunction,
    x: &HyperPoint,
    quad: &QuadratureSpec,
) -> Result<Complex64, TransformError> {
    let sphere = quad.sphere_rule();
    let coarse = ray_curvature_integral(hfun, x, &sphere, 0.02);
    let fine = ray_curvature_integral(hfun, x, &sphere, 0.01);
    let spread = (coarse - fine).norm();
    if spread > 0.02 * (1.0 + fine.norm()) {
        return Err(TransformError::DifferentiationNoise { spread });
    }
    Ok(fine)
}

fn ray_curvature_integral(
    hfun: &ConeFunction,
    x: &HyperPoint,
    sphere: &SphereRule,
    delta: f64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for node in &sphere.nodes {
        let q = q_unit(x, node.dir);
        let s0 = 1.0 / q;
        let e = delta * s0;
        let sample = |k: i32| hfun.at(s0 + f64::from(k) * e, node.dir);
        let hm2 = sample(-2);
        let hm1 = sample(-1);
        let h0 = sample(0);
        let hp1 = sample(1);
        let hp2 = sample(2);
        let d1 = (hm2 - 8.0 * hm1 + 8.0 * hp1 - hp2) / (12.0 * e);
        let d2 = (-hm2 + 16.0 * hm1 - 30.0 * h0 + 16.0 * hp1 - hp2) / (12.0 * e * e);
        acc += node.weight * (2.0 * d1 / (q * q * q) + d2 / (q * q * q * q));
    }
    -acc / (8.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// Named analytic test functions: radial gaussian, off-center gaussian,
/// compactly supported bump, plane-wave-modulated gaussian, narrow gaussian.
pub fn test_function(name: &str, params: &[f64]) -> Option<HyperFunction> {
    match name {
        "gaussian" => {
            let s = params.first().copied().unwrap_or(1.0);
            Some(HyperFunction::new(
                move |x: &HyperPoint| {
                    let p = x.spatial();
                    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                    Complex64::new((-r2 / (s * s)).exp(), 0.0)
                },
                DecayClass::GaussianDamped { c: 1.0, s },
                true,
            ))
        }
        "offcenter" => {
            let s = params.first().copied().unwrap_or(1.0);
            let a = [0.5, -0.35, 0.2];
            Some(HyperFunction::new(
                move |x: &HyperPoint| {
                    let p = x.spatial();
                    let d = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
                    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    Complex64::new((-r2 / (s * s)).exp(), 0.0)
                },
                DecayClass::GaussianDamped {
                    c: (2.0f64).exp(),
                    s,
                },
                true,
            ))
        }
        "bump" => {
            let radius = params.first().copied().unwrap_or(2.5);
            Some(HyperFunction::new(
                move |x: &HyperPoint| {
                    let p = x.spatial();
                    let t2 = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / (radius * radius);
                    if t2 >= 1.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new((1.0 - 1.0 / (1.0 - t2)).exp(), 0.0)
                    }
                },
                DecayClass::Compact { radius },
                true,
            ))
        }
        "modwave" => {
            let s = params.first().copied().unwrap_or(1.0);
            let a = [1.3, -0.7, 0.4];
            Some(HyperFunction::new(
                move |x: &HyperPoint| {
                    let p = x.spatial();
                    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                    let phase = a[0] * p[0] + a[1] * p[1] + a[2] * p[2];
                    Complex64::new(0.0, phase).exp() * (-r2 / (s * s)).exp()
                },
                DecayClass::GaussianDamped { c: 1.0, s },
                false,
            ))
        }
        "narrow" => {
            let s = params.first().copied().unwrap_or(0.3);
            test_function("gaussian", &[s])
        }
        _ => None,
    }
}
