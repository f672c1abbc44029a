use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::Dataset;

pub type Rational = Ratio<i128>;

/// Integer counts of `y = level` per (x), (x, z) and (x, z, w) cell.
pub(crate) struct CellCounts {
    pub n_x: [i128; 2],
    pub s_x: [i128; 2],
    pub n_z: [Vec<i128>; 2],
    pub s_z: [Vec<i128>; 2],
    pub n_zw: [Vec<i128>; 2],
    pub s_zw: [Vec<i128>; 2],
}

impl CellCounts {
    pub fn new(data: &Dataset, y_level: &str) -> Result<Self> {
        let y = data
            .roles()
            .y
            .ok_or_else(|| Error::Schema("no outcome column declared".into()))?;
        let hit = data.level_code(y, y_level);
        let st = data.strata();
        let mut c = CellCounts {
            n_x: [0; 2],
            s_x: [0; 2],
            n_z: [vec![0; st.n_z], vec![0; st.n_z]],
            s_z: [vec![0; st.n_z], vec![0; st.n_z]],
            n_zw: [vec![0; st.n_zw], vec![0; st.n_zw]],
            s_zw: [vec![0; st.n_zw], vec![0; st.n_zw]],
        };
        for (r, &code) in data.codes(y).iter().enumerate() {
            let x = st.x[r] as usize;
            let s = i128::from(Some(code) == hit);
            c.n_x[x] += 1;
            c.s_x[x] += s;
            c.n_z[x][st.z[r] as usize] += 1;
            c.s_z[x][st.z[r] as usize] += s;
            c.n_zw[x][st.zw[r] as usize] += 1;
            c.s_zw[x][st.zw[r] as usize] += s;
        }
        for x in 0..2 {
            if c.n_x[x] == 0 {
                return Err(Error::Estimation(format!(
                    "protected-attribute stratum {} is empty",
                    data.schema().level(x as u8)
                )));
            }
        }
        Ok(c)
    }

    pub fn p_x(&self, x: usize) -> Rational {
        Ratio::new(self.s_x[x], self.n_x[x])
    }

    /// P(y | x, z), borrowing the other group's z-stratum when empty, then
    /// P(y | x). Mirrors the estimators' pooling.
    pub fn p_z(&self, x: usize, z: usize) -> (Rational, bool) {
        let other = 1 - x;
        match (self.n_z[x][z], self.n_z[other][z]) {
            (0, 0) => (self.p_x(x), true),
            (0, n) => (Ratio::new(self.s_z[other][z], n), true),
            (n, _) => (Ratio::new(self.s_z[x][z], n), false),
        }
    }

    /// P(y | x, z, w), borrowing the other group's cell when empty, then
    /// falling back to P(y | x, z). The flag reports whether a fallback was
    /// used.
    pub fn p_zw(&self, x: usize, zw: usize, z: usize) -> (Rational, bool) {
        let other = 1 - x;
        match (self.n_zw[x][zw], self.n_zw[other][zw]) {
            (0, 0) => (self.p_z(x, z).0, true),
            (0, n) => (Ratio::new(self.s_zw[other][zw], n), true),
            (n, _) => (Ratio::new(self.s_zw[x][zw], n), false),
        }
    }
}

/// Exact label of a rational: `p/q`, or `p` when integral.
pub fn rational_label(r: &Rational) -> String {
    r.to_string()
}

pub fn rational_value(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
