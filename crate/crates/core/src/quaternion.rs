//! Unit quaternions as the concrete model of SU(2).
//!
//! A quaternion `a + bi + cj + dk` with `a^2+b^2+c^2+d^2 = 1` corresponds to
//! the SU(2) matrix `[[a+bi, c+di], [-c+di, a-bi]]`; quaternion multiplication
//! matches matrix multiplication under this identification. SO(3) is modelled
//! by quaternions modulo sign.

/// A quaternion `a + bi + cj + dk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn normalized(&self) -> Quaternion {
        let n = self.norm();
        Quaternion::new(self.a / n, self.b / n, self.c / n, self.d / n)
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    /// Group inverse; equals the conjugate for unit quaternions.
    pub fn inverse(&self) -> Quaternion {
        self.conjugate()
    }

    pub fn mul(&self, o: &Quaternion) -> Quaternion {
        Quaternion::new(
            self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            self.a * o.b + self.b * o.a + self.c * o.d - self.d * o.c,
            self.a * o.c - self.b * o.d + self.c * o.a + self.d * o.b,
            self.a * o.d + self.b * o.c - self.c * o.b + self.d * o.a,
        )
    }

    pub fn dot(&self, o: &Quaternion) -> f64 {
        self.a * o.a + self.b * o.b + self.c * o.c + self.d * o.d
    }

    pub fn neg(&self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }

    /// Angle in `[0, pi]` between two unit quaternions on the 3-sphere,
    /// computed with the numerically robust half-angle form.
    pub fn angle(&self, o: &Quaternion) -> f64 {
        let diff = Quaternion::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d).norm();
        let sum = Quaternion::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d).norm();
        2.0 * diff.atan2(sum)
    }

    /// Angle in `[0, pi/2]` between the classes `{+self,-self}` and
    /// `{+o,-o}`: the SO(3) variant of [`Quaternion::angle`].
    pub fn angle_mod_sign(&self, o: &Quaternion) -> f64 {
        let diff = Quaternion::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d).norm();
        let sum = Quaternion::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d).norm();
        2.0 * diff.min(sum).atan2(diff.max(sum))
    }

    /// Canonical representative of the class `{+q, -q}`: the first coordinate
    /// with magnitude above 1e-12 is made positive.
    pub fn canonical_mod_sign(&self) -> Quaternion {
        for v in [self.a, self.b, self.c, self.d] {
            if v.abs() > 1e-12 {
                return if v < 0.0 { self.neg() } else { *self };
            }
        }
        *self
    }
}
