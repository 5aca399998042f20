//! Minkowski four-vectors, the unit hyperboloid H3, and the forward light cone.
//!
//! Ambient signature is (+,+,+,-): `mink_dot(u, v) = u1 v1 + u2 v2 + u3 v3 - u4 v4`.
//! H3 is the upper sheet `x.x = -1, x4 > 0`; wave labels live on the forward
//! cone `k.k = 0, omega > 0` with an explicit section sign `sigma`.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Diagonal of the ambient metric, index order (1, 2, 3, 4).
pub const METRIC_DIAG: [f64; 4] = [1.0, 1.0, 1.0, -1.0];

/// Tolerance for on-shell checks (`x.x = -1`, `k.k = 0`, unit directions).
pub const ON_SHELL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("four-vector is off shell: constraint residual {residual:e}")]
    OffShell { residual: f64 },
    #[error("direction vector has zero length")]
    ZeroDirection,
    #[error("cone frequency must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("section sign must be +1 or -1, got {0}")]
    BadSectionSign(i8),
}

/// Contravariant four-vector `(x1, x2, x3, x4)` in the ambient Minkowski space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub fn new(c: [f64; 4]) -> Self {
        FourVector(c)
    }

    /// Covariant components `x_i = g_ij x^j`; only the fourth entry flips sign.
    pub fn lower(&self) -> [f64; 4] {
        [self.0[0], self.0[1], self.0[2], -self.0[3]]
    }

    pub fn scale(&self, s: f64) -> FourVector {
        FourVector([s * self.0[0], s * self.0[1], s * self.0[2], s * self.0[3]])
    }

    pub fn sub(&self, o: &FourVector) -> FourVector {
        FourVector([
            self.0[0] - o.0[0],
            self.0[1] - o.0[1],
            self.0[2] - o.0[2],
            self.0[3] - o.0[3],
        ])
    }

    /// Minkowski square `x.x`.
    pub fn norm2(&self) -> f64 {
        mink_dot(self, self)
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }
}

/// Ambient inner product with signature (+,+,+,-).
pub fn mink_dot(u: &FourVector, v: &FourVector) -> f64 {
    u.0[0] * v.0[0] + u.0[1] * v.0[1] + u.0[2] * v.0[2] - u.0[3] * v.0[3]
}

/// Point on the upper sheet of `x.x = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperPoint {
    vec: FourVector,
}

impl HyperPoint {
    /// Lift a spatial chart point to the hyperboloid: `x4 = sqrt(1 + |x|^2)`.
    pub fn lift(spatial: [f64; 3]) -> HyperPoint {
        let r2 = spatial[0] * spatial[0] + spatial[1] * spatial[1] + spatial[2] * spatial[2];
        HyperPoint {
            vec: FourVector([spatial[0], spatial[1], spatial[2], (1.0 + r2).sqrt()]),
        }
    }

    /// Accept an explicit four-vector, enforcing the sheet constraints.
    pub fn from_four_vector(v: FourVector) -> Result<HyperPoint, GeometryError> {
        let residual = (v.norm2() + 1.0).abs();
        if residual > ON_SHELL_TOL || v.0[3] <= 0.0 {
            return Err(GeometryError::OffShell { residual });
        }
        Ok(HyperPoint { vec: v })
    }

    pub fn as_four_vector(&self) -> &FourVector {
        &self.vec
    }

    pub fn spatial(&self) -> [f64; 3] {
        self.vec.spatial()
    }

    pub fn x4(&self) -> f64 {
        self.vec.0[3]
    }
}

/// Forward-cone vector stored as `(omega, n, sigma)` with `k = omega (n, sigma)`.
///
/// `n` is a unit 3-direction and `sigma` picks the section sign of the fourth
/// component, so `k.k = 0` holds exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeVector {
    pub omega: f64,
    pub n: [f64; 3],
    pub sigma: i8,
}

impl ConeVector {
    pub fn new(omega: f64, n: [f64; 3], sigma: i8) -> Result<ConeVector, GeometryError> {
        if omega <= 0.0 {
            return Err(GeometryError::NonPositiveOmega(omega));
        }
        if sigma != 1 && sigma != -1 {
            return Err(GeometryError::BadSectionSign(sigma));
        }
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len < 1e-300 {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(ConeVector {
            omega,
            n: [n[0] / len, n[1] / len, n[2] / len],
            sigma,
        })
    }

    pub fn as_four_vector(&self) -> FourVector {
        FourVector([
            self.omega * self.n[0],
            self.omega * self.n[1],
            self.omega * self.n[2],
            self.omega * f64::from(self.sigma),
        ])
    }

    pub fn scaled(&self, t: f64) -> Result<ConeVector, GeometryError> {
        ConeVector::new(self.omega * t, self.n, self.sigma)
    }
}

/// `x.k` for a hyperboloid point and a cone vector.
///
/// Sign lemma: the pairing never vanishes and its sign is `-sigma`, because
/// `x4 > |x_spatial|` on the upper sheet.
pub fn pairing(x: &HyperPoint, k: &ConeVector) -> f64 {
    let xs = x.spatial();
    k.omega * (xs[0] * k.n[0] + xs[1] * k.n[1] + xs[2] * k.n[2] - f64::from(k.sigma) * x.x4())
}

/// Density of the invariant volume `Dx = d^3x / x4` relative to `d^3x`.
pub fn measure_weight_h3(x: &HyperPoint) -> f64 {
    1.0 / x.x4()
}

/// Invariant volume of the chart ball `|x_spatial| <= radius`, in closed form.
pub fn ball_volume_h3(radius: f64) -> f64 {
    2.0 * std::f64::consts::PI * (radius * (radius * radius + 1.0).sqrt() - radius.asinh())
}

/// Density of the cone measure `Dk = omega d omega dn` relative to `d omega dn`.
pub fn measure_weight_cone(omega: f64) -> f64 {
    omega
}

/// Wave label with a possibly off-cone four-vector `k` and spectral parameter `rho`.
#[derive(Debug, Clone, Copy)]
pub struct GeneralizedWaveLabel {
    pub k: FourVector,
    pub rho: f64,
}

impl GeneralizedWaveLabel {
    /// Invariant mass squared `m^2 = k4^2 - |k_spatial|^2`; zero on the cone.
    pub fn m2(&self) -> f64 {
        let s = self.k.spatial();
        self.k.0[3] * self.k.0[3] - (s[0] * s[0] + s[1] * s[1] + s[2] * s[2])
    }

    /// Eigenvalue of the spectral label, `lambda = 1 + rho^2`.
    pub fn lambda(&self) -> f64 {
        1.0 + self.rho * self.rho
    }
}

/// Draw hyperboloid points whose spatial parts are centered Gaussians of the
/// given scale. The generator is ChaCha12 seeded from the 64-bit seed, so
/// sequences are reproducible across platforms.
pub fn sample_hyper_points(count: usize, seed: u64, radius_scale: f64) -> Vec<HyperPoint> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, radius_scale).expect("finite scale");
    (0..count)
        .map(|_| {
            let s = [
                normal.sample(&mut rng),
                normal.sample(&mut rng),
                normal.sample(&mut rng),
            ];
            HyperPoint::lift(s)
        })
        .collect()
}

/// Uniform-on-sphere unit directions, reproducible from the seed.
pub fn sample_directions(count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("finite scale");
    (0..count)
        .map(|_| loop {
            let v: [f64; 3] = [
                normal.sample(&mut rng),
                normal.sample(&mut rng),
                normal.sample(&mut rng),
            ];
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if len > 1e-6 {
                return [v[0] / len, v[1] / len, v[2] / len];
            }
        })
        .collect()
}
