//! Truncated-Taylor (jet) arithmetic: complex coefficients, three variables,
//! fixed total order 4, plus a one-variable second-order dual for radial
//! problems.
//!
//! Operators consume derivative orders; `valid` tracks how many orders of a
//! jet's coefficients are still meaningful, so a chain of applications that
//! exceeds the stored order is detected instead of silently returning junk.

use num_complex::Complex64;
use once_cell::sync::Lazy;

pub const JET_ORDER: usize = 4;
pub const JET_LEN: usize = 35;

/// Multi-indices ordered by total degree, then reverse-lex within a degree.
static INDEX: Lazy<Vec<[u8; 3]>> = Lazy::new(|| {
    let mut v = Vec::with_capacity(JET_LEN);
    for d in 0..=JET_ORDER as u8 {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                v.push([a, b, d - a - b]);
            }
        }
    }
    v
});

static POS: Lazy<[[[u8; 5]; 5]; 5]> = Lazy::new(|| {
    let mut t = [[[u8::MAX; 5]; 5]; 5];
    for (p, idx) in INDEX.iter().enumerate() {
        t[idx[0] as usize][idx[1] as usize][idx[2] as usize] = p as u8;
    }
    t
});

/// All ordered coefficient pairs whose degrees sum to at most the jet order,
/// with the destination slot of their product.
static PRODUCTS: Lazy<Vec<(u8, u8, u8)>> = Lazy::new(|| {
    let mut v = Vec::new();
    for (i, a) in INDEX.iter().enumerate() {
        for (j, b) in INDEX.iter().enumerate() {
            let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
            if (s[0] + s[1] + s[2]) as usize <= JET_ORDER {
                v.push((i as u8, j as u8, POS[s[0] as usize][s[1] as usize][s[2] as usize]));
            }
        }
    }
    v
});

fn degree(p: usize) -> usize {
    let idx = INDEX[p];
    (idx[0] + idx[1] + idx[2]) as usize
}

#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub c: [Complex64; JET_LEN],
    /// Coefficients of total degree <= valid are trustworthy.
    pub valid: i8,
}

impl Jet {
    pub fn constant(v: Complex64) -> Self {
        let mut c = [Complex64::new(0.0, 0.0); JET_LEN];
        c[0] = v;
        Jet {
            c,
            valid: JET_ORDER as i8,
        }
    }

    pub fn real_constant(v: f64) -> Self {
        Self::constant(Complex64::new(v, 0.0))
    }

    /// Coordinate seed: value plus a unit linear term along `axis`.
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut j = Self::real_constant(v);
        let e = match axis {
            0 => [1, 0, 0],
            1 => [0, 1, 0],
            _ => [0, 0, 1],
        };
        j.c[POS[e[0]][e[1]][e[2]] as usize] = Complex64::new(1.0, 0.0);
        j
    }

    pub fn value(&self) -> Complex64 {
        debug_assert!(self.valid >= 0, "jet order exhausted");
        self.c[0]
    }

    pub fn scale(mut self, s: Complex64) -> Self {
        for c in &mut self.c {
            *c *= s;
        }
        self
    }

    pub fn scale_re(self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add_scalar(mut self, s: Complex64) -> Self {
        self.c[0] += s;
        self
    }

    /// Partial derivative along `axis`; costs one order.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = [Complex64::new(0.0, 0.0); JET_LEN];
        for (p, idx) in INDEX.iter().enumerate() {
            if degree(p) >= JET_ORDER {
                continue;
            }
            let mut src = *idx;
            src[axis] += 1;
            let s = POS[src[0] as usize][src[1] as usize][src[2] as usize] as usize;
            out[p] = (idx[axis] as f64 + 1.0) * self.c[s];
        }
        Jet {
            c: out,
            valid: self.valid - 1,
        }
    }

    /// Composes a univariate function given its derivatives at the jet's
    /// value: derivs[k] = f^(k)(c0). Exact to the jet order via Horner in
    /// the constant-free part.
    pub fn compose(&self, derivs: [Complex64; JET_ORDER + 1]) -> Self {
        let mut h = *self;
        h.c[0] = Complex64::new(0.0, 0.0);
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0];
        let mut r = Jet::constant(derivs[JET_ORDER] / fact[JET_ORDER]);
        r.valid = self.valid;
        for k in (0..JET_ORDER).rev() {
            r = r * h;
            r.c[0] += derivs[k] / fact[k];
        }
        r.valid = self.valid;
        r
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose([e; JET_ORDER + 1])
    }

    pub fn ln(&self) -> Self {
        let z = self.c[0];
        let iz = 1.0 / z;
        self.compose([z.ln(), iz, -iz * iz, 2.0 * iz * iz * iz, -6.0 * iz * iz * iz * iz])
    }

    pub fn sqrt(&self) -> Self {
        self.powc(Complex64::new(0.5, 0.0))
    }

    /// Principal power with complex exponent; base must avoid zero.
    pub fn powc(&self, s: Complex64) -> Self {
        let z = self.c[0];
        let mut d = [Complex64::new(0.0, 0.0); JET_ORDER + 1];
        let mut coef = Complex64::new(1.0, 0.0);
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = coef * z.powc(s - k as f64);
            coef *= s - k as f64;
        }
        self.compose(d)
    }

    pub fn recip(&self) -> Self {
        self.powc(Complex64::new(-1.0, 0.0))
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        self.valid = self.valid.min(rhs.valid);
        self
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        self.valid = self.valid.min(rhs.valid);
        self
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in &mut self.c {
            *a = -*a;
        }
        self
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = [Complex64::new(0.0, 0.0); JET_LEN];
        for &(i, j, k) in PRODUCTS.iter() {
            out[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        Jet {
            c: out,
            valid: self.valid.min(rhs.valid),
        }
    }
}

/// One-variable jet of order 2: value, first and second derivative.
#[derive(Clone, Copy, Debug)]
pub struct CDual2 {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl CDual2 {
    pub fn constant(v: Complex64) -> Self {
        CDual2 {
            v,
            d1: Complex64::new(0.0, 0.0),
            d2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn variable(v: f64) -> Self {
        CDual2 {
            v: Complex64::new(v, 0.0),
            d1: Complex64::new(1.0, 0.0),
            d2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn powc(&self, s: Complex64) -> Self {
        let f = self.v.powc(s);
        let f1 = s * self.v.powc(s - 1.0);
        let f2 = s * (s - 1.0) * self.v.powc(s - 2.0);
        CDual2 {
            v: f,
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
        }
    }

    pub fn sqrt(&self) -> Self {
        self.powc(Complex64::new(0.5, 0.0))
    }

    pub fn recip(&self) -> Self {
        self.powc(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(mut self, s: Complex64) -> Self {
        self.v *= s;
        self.d1 *= s;
        self.d2 *= s;
        self
    }

    pub fn add_scalar(mut self, s: Complex64) -> Self {
        self.v += s;
        self
    }
}

impl std::ops::Add for CDual2 {
    type Output = CDual2;
    fn add(self, r: CDual2) -> CDual2 {
        CDual2 {
            v: self.v + r.v,
            d1: self.d1 + r.d1,
            d2: self.d2 + r.d2,
        }
    }
}

impl std::ops::Sub for CDual2 {
    type Output = CDual2;
    fn sub(self, r: CDual2) -> CDual2 {
        CDual2 {
            v: self.v - r.v,
            d1: self.d1 - r.d1,
            d2: self.d2 - r.d2,
        }
    }
}

impl std::ops::Mul for CDual2 {
    type Output = CDual2;
    fn mul(self, r: CDual2) -> CDual2 {
        CDual2 {
            v: self.v * r.v,
            d1: self.d1 * r.v + self.v * r.d1,
            d2: self.d2 * r.v + 2.0 * self.d1 * r.d1 + self.v * r.d2,
        }
    }
}
