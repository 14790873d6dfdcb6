use nalgebra::{Matrix3, Vector3};

/// A quadrature node: position of `r(t_i)` and the weight `w_i |r'(t_i)|`.
pub(crate) type Node = [f64; 4];

/// Φ, ∇Φ and the Hessian of Φ at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub potential: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

/// Accumulates the inverse-distance kernel and its derivatives.
///
/// `ORDER` selects how much is computed: 0 = potential, 1 = plus gradient,
/// 2 = plus Hessian. Summation order is the node order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accumulator<const ORDER: u8> {
    potential: f64,
    gradient: [f64; 3],
    // xx, yy, zz, xy, xz, yz
    hessian: [f64; 6],
}

impl<const ORDER: u8> Accumulator<ORDER> {
    #[inline]
    pub fn add_nodes(&mut self, nodes: &[Node], x: &Vector3<f64>) {
        for n in nodes {
            let dx = x.x - n[0];
            let dy = x.y - n[1];
            let dz = x.z - n[2];
            let r2 = dx * dx + dy * dy + dz * dz;
            let inv = 1.0 / r2.sqrt();
            let w = n[3];
            self.potential += w * inv;
            if ORDER >= 1 {
                let inv3 = w * inv * inv * inv;
                self.gradient[0] -= inv3 * dx;
                self.gradient[1] -= inv3 * dy;
                self.gradient[2] -= inv3 * dz;
                if ORDER >= 2 {
                    let inv5 = 3.0 * inv3 * inv * inv;
                    self.hessian[0] += inv5 * dx * dx - inv3;
                    self.hessian[1] += inv5 * dy * dy - inv3;
                    self.hessian[2] += inv5 * dz * dz - inv3;
                    self.hessian[3] += inv5 * dx * dy;
                    self.hessian[4] += inv5 * dx * dz;
                    self.hessian[5] += inv5 * dy * dz;
                }
            }
        }
    }

    pub fn potential(&self) -> f64 {
        self.potential
    }

    pub fn gradient(&self) -> Vector3<f64> {
        Vector3::from(self.gradient)
    }

    pub fn finish(&self) -> FieldSample {
        let h = &self.hessian;
        FieldSample {
            potential: self.potential,
            gradient: Vector3::from(self.gradient),
            hessian: Matrix3::new(h[0], h[3], h[4], h[3], h[1], h[5], h[4], h[5], h[2]),
        }
    }
}
