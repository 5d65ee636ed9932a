use std::collections::HashMap;

use num_complex::Complex64;

use crate::cusps::CuspTable;
use crate::exactnum::Rational;

/// Fourier coefficients A(class, n) keyed by class and integer index, with
/// the class widths and cusp parameters needed for B(class, alpha).
#[derive(Clone, Debug, Default)]
pub struct CoefficientView {
    widths: Vec<i64>,
    mus: Vec<Rational>,
    values: HashMap<(usize, i64), Complex64>,
    /// Values are exact (synthetic) rather than numerically extracted, so
    /// zero tests compare against zero literally.
    pub exact: bool,
}

impl CoefficientView {
    pub fn new(table: &CuspTable) -> Self {
        CoefficientView {
            widths: table.classes.iter().map(|c| c.m).collect(),
            mus: table.classes.iter().map(|c| c.mu).collect(),
            values: HashMap::new(),
            exact: false,
        }
    }

    pub fn exact(table: &CuspTable) -> Self {
        CoefficientView { exact: true, ..Self::new(table) }
    }

    pub fn set(&mut self, class_id: usize, n: i64, value: Complex64) {
        self.values.insert((class_id, n), value);
    }

    pub fn get(&self, class_id: usize, n: i64) -> Option<Complex64> {
        self.values.get(&(class_id, n)).copied()
    }

    pub fn contains(&self, class_id: usize, n: i64) -> bool {
        self.values.contains_key(&(class_id, n))
    }

    pub fn width(&self, class_id: usize) -> i64 {
        self.widths[class_id]
    }

    pub fn mu(&self, class_id: usize) -> Rational {
        self.mus[class_id]
    }

    /// The index m alpha - mu if it is an integer.
    pub fn b_index(&self, class_id: usize, alpha: Rational) -> Option<i64> {
        let idx = Rational::from(self.widths[class_id]) * alpha - self.mus[class_id];
        idx.as_integer().map(|n| n as i64)
    }

    /// B(class, alpha): A(class, m alpha - mu) when that index is integral,
    /// otherwise zero. `None` when the needed coefficient is missing.
    pub fn b(&self, class_id: usize, alpha: Rational) -> Option<Complex64> {
        match self.b_index(class_id, alpha) {
            Some(n) => self.get(class_id, n),
            None => Some(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, i64), &Complex64)> {
        self.values.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::DirichletCharacter;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn b_vanishes_off_the_lattice(num in -200i128..200, den in 1i128..50, class in 0usize..4) {
            let table = CuspTable::build(8, &DirichletCharacter::trivial(8)).unwrap();
            let mut view = CoefficientView::exact(&table);
            for c in 0..table.len() {
                for n in -2000..2000 {
                    view.set(c, n, Complex64::new(1.0, 0.0));
                }
            }
            prop_assume!(num != 0);
            let alpha = Rational::new(num, den);
            let idx = Rational::from(table.class(class).m) * alpha - table.class(class).mu;
            let b = view.b(class, alpha).unwrap();
            prop_assert_eq!(b.re == 0.0, !idx.is_integer());
        }
    }
}
