use std::f64::consts::TAU;

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Maps an angle onto the half-open circle (0, 2π].
pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w == 0.0 || w >= TAU {
        TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn wrap_angle_lands_in_half_open_circle() {
        assert_eq!(wrap_angle(0.0), TAU);
        assert_eq!(wrap_angle(TAU), TAU);
        assert!((wrap_angle(-1.0) - (TAU - 1.0)).abs() < 1e-15);
        assert!((wrap_angle(TAU + 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(wrap_angle(-1e-300), TAU);
    }
}
