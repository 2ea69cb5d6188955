//! Second-order forward-mode jets in two variables: value, gradient and
//! Hessian propagated through arithmetic and `sin`/`cos`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            d: [0.0; 2],
            h: [[0.0; 2]; 2],
        }
    }

    /// The coordinate function `x_k` evaluated at `v`.
    pub fn variable(v: f64, k: usize) -> Self {
        let mut d = [0.0; 2];
        d[k] = 1.0;
        Self { v, d, h: [[0.0; 2]; 2] }
    }

    pub fn laplacian(&self) -> f64 {
        self.h[0][0] + self.h[1][1]
    }

    /// `g(self)` given `g`, `g'` and `g''` at the value.
    fn chain(&self, g: f64, g1: f64, g2: f64) -> Self {
        let mut out = Self::constant(g);
        for a in 0..2 {
            out.d[a] = g1 * self.d[a];
            for b in 0..2 {
                out.h[a][b] = g2 * self.d[a] * self.d[b] + g1 * self.h[a][b];
            }
        }
        out
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn scale(self, s: f64) -> Self {
        self * Jet::constant(s)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for a in 0..2 {
            out.d[a] += o.d[a];
            for b in 0..2 {
                out.h[a][b] += o.h[a][b];
            }
        }
        out
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for a in 0..2 {
            out.d[a] = self.d[a] * o.v + self.v * o.d[a];
            for b in 0..2 {
                out.h[a][b] = self.h[a][b] * o.v
                    + self.d[a] * o.d[b]
                    + self.d[b] * o.d[a]
                    + self.v * o.h[a][b];
            }
        }
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        self + Jet::constant(c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}
