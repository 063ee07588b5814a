//! Compensated summation for long series.

/// Neumaier variant of Kahan summation. Unlike plain Kahan it stays accurate
/// when an addend is larger in magnitude than the running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut s = Self::new();
        for v in iter {
            s.add(v);
        }
        s.value()
    }
}
