use serde::Serialize;

use crate::rational::Rational;

/// One breakpoint: left limit and value at `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Knot {
    pub t: Rational,
    pub left: Rational,
    pub right: Rational,
}

/// Right-continuous piecewise-linear function, linear between knots and
/// zero outside `[first knot, last knot]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PiecewiseLinear {
    knots: Vec<Knot>,
}

impl PiecewiseLinear {
    /// Knots must be strictly increasing in `t`.
    pub fn from_knots(knots: Vec<Knot>) -> Self {
        debug_assert!(knots.windows(2).all(|w| w[0].t < w[1].t));
        PiecewiseLinear { knots }
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn is_zero(&self) -> bool {
        self.knots.iter().all(|k| k.left.is_zero() && k.right.is_zero())
    }

    fn locate(&self, t: &Rational) -> Result<usize, usize> {
        self.knots.binary_search_by(|k| k.t.cmp(t))
    }

    fn interpolate(&self, k: usize, t: &Rational) -> Rational {
        let (a, b) = (&self.knots[k], &self.knots[k + 1]);
        &a.right + (&b.left - &a.right) * (t - &a.t) / (&b.t - &a.t)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        match self.locate(t) {
            Ok(k) => self.knots[k].right.clone(),
            Err(0) => Rational::zero(),
            Err(k) if k == self.knots.len() => Rational::zero(),
            Err(k) => self.interpolate(k - 1, t),
        }
    }

    pub fn eval_left(&self, t: &Rational) -> Rational {
        match self.locate(t) {
            Ok(k) => self.knots[k].left.clone(),
            Err(0) => Rational::zero(),
            Err(k) if k == self.knots.len() => Rational::zero(),
            Err(k) => self.interpolate(k - 1, t),
        }
    }

    /// Exact integral over the whole line.
    pub fn integral(&self) -> Rational {
        self.knots
            .windows(2)
            .map(|w| (&w[1].t - &w[0].t) * (&w[0].right + &w[1].left) / Rational::from_int(2))
            .sum()
    }
}
