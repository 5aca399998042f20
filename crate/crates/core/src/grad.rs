//! Forward-mode derivatives over the 8-dimensional ambient phase space.
//!
//! `Grad8<S>` carries a value and the eight partials with respect to
//! `(x^1..x^4, p_1..p_4)`. Nesting (`Grad8<Grad8<f64>>`, ...) yields exact
//! higher derivatives through arbitrary arithmetic, which is what lets
//! brackets of brackets (Jacobi tests) be evaluated without finite
//! differencing. Nesting is provided to depth three; evaluating a bracket at
//! the deepest level reports an error instead of recursing further.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const PHASE_DIM: usize = 8;

/// Arithmetic required of a phase-space scalar.
pub trait ScalarArith:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    /// Leading (derivative-free) value.
    fn leading(&self) -> f64;
    fn sqrt(self) -> Self;
}

/// Scalar that can be lifted one derivative level higher.
pub trait PhaseScalar: ScalarArith {
    type Lifted: PhaseScalar;
    /// False on the deepest provided level; lifting there is a usage error.
    const CAN_LIFT: bool;
    fn lift_const(self) -> Self::Lifted;
    fn lift_seed(self, var: usize) -> Self::Lifted;
    fn unlift(l: Self::Lifted) -> (Self, [Self; PHASE_DIM]);
}

impl ScalarArith for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn leading(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Value plus the eight first partials, with entries in `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grad8<S> {
    pub v: S,
    pub d: [S; PHASE_DIM],
}

impl<S: ScalarArith> Grad8<S> {
    pub fn constant(v: S) -> Self {
        Grad8 {
            v,
            d: [S::zero(); PHASE_DIM],
        }
    }

    pub fn seed(v: S, var: usize) -> Self {
        let mut d = [S::zero(); PHASE_DIM];
        d[var] = S::one();
        Grad8 { v, d }
    }
}

impl<S: ScalarArith> Add for Grad8<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut d = self.d;
        for i in 0..PHASE_DIM {
            d[i] = d[i] + o.d[i];
        }
        Grad8 { v: self.v + o.v, d }
    }
}

impl<S: ScalarArith> Sub for Grad8<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut d = self.d;
        for i in 0..PHASE_DIM {
            d[i] = d[i] - o.d[i];
        }
        Grad8 { v: self.v - o.v, d }
    }
}

impl<S: ScalarArith> Mul for Grad8<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut d = [S::zero(); PHASE_DIM];
        for i in 0..PHASE_DIM {
            d[i] = self.d[i] * o.v + self.v * o.d[i];
        }
        Grad8 { v: self.v * o.v, d }
    }
}

impl<S: ScalarArith> Div for Grad8<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let v = self.v / o.v;
        let mut d = [S::zero(); PHASE_DIM];
        for i in 0..PHASE_DIM {
            d[i] = (self.d[i] - v * o.d[i]) / o.v;
        }
        Grad8 { v, d }
    }
}

impl<S: ScalarArith> Neg for Grad8<S> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut d = self.d;
        for i in 0..PHASE_DIM {
            d[i] = -d[i];
        }
        Grad8 { v: -self.v, d }
    }
}

impl<S: ScalarArith> ScalarArith for Grad8<S> {
    fn from_f64(c: f64) -> Self {
        Grad8::constant(S::from_f64(c))
    }
    fn leading(&self) -> f64 {
        self.v.leading()
    }
    fn sqrt(self) -> Self {
        // d sqrt(v) = d v / (2 sqrt(v))
        let r = self.v.sqrt();
        let two_r = r + r;
        let mut d = [S::zero(); PHASE_DIM];
        for i in 0..PHASE_DIM {
            d[i] = self.d[i] / two_r;
        }
        Grad8 { v: r, d }
    }
}

macro_rules! impl_phase_scalar {
    ($ty:ty, $lifted:ty) => {
        impl PhaseScalar for $ty {
            type Lifted = $lifted;
            const CAN_LIFT: bool = true;
            fn lift_const(self) -> Self::Lifted {
                Grad8::constant(self)
            }
            fn lift_seed(self, var: usize) -> Self::Lifted {
                Grad8::seed(self, var)
            }
            fn unlift(l: Self::Lifted) -> (Self, [Self; PHASE_DIM]) {
                (l.v, l.d)
            }
        }
    };
}

impl_phase_scalar!(f64, Grad8<f64>);
impl_phase_scalar!(Grad8<f64>, Grad8<Grad8<f64>>);
impl_phase_scalar!(Grad8<Grad8<f64>>, Grad8<Grad8<Grad8<f64>>>);

impl PhaseScalar for Grad8<Grad8<Grad8<f64>>> {
    type Lifted = Self;
    const CAN_LIFT: bool = false;
    fn lift_const(self) -> Self::Lifted {
        unreachable!("derivative nesting deeper than three levels")
    }
    fn lift_seed(self, _var: usize) -> Self::Lifted {
        unreachable!("derivative nesting deeper than three levels")
    }
    fn unlift(_l: Self::Lifted) -> (Self, [Self; PHASE_DIM]) {
        unreachable!("derivative nesting deeper than three levels")
    }
}
