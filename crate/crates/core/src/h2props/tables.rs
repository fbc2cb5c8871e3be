//! Embedded parahydrogen tables and their interpolation.
//!
//! The data files are produced by `tools/gen_h2_tables.py`. The saturation
//! curve is tabulated against ln(P). Liquid and vapor tables are stored as
//! offsets from the saturated state at the same pressure on normalized
//! coordinates, so they join the saturation curve exactly.

use std::sync::OnceLock;

use super::interp::{locate, slope_at, window, window_value, Basis, Pchip};

const SAT_CSV: &str = include_str!("../../data/parahydrogen_sat.csv");
const LIQUID_CSV: &str = include_str!("../../data/parahydrogen_liquid.csv");
const VAPOR_CSV: &str = include_str!("../../data/parahydrogen_vapor.csv");

/// Upper temperature bound of the vapor table.
pub(crate) const T_VAPOR_MAX: f64 = 45.0;

/// Saturated properties at one pressure.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SatRow {
    pub t: f64,
    pub rho_l: f64,
    pub rho_v: f64,
    pub h_l: f64,
    pub h_v: f64,
    pub s_l: f64,
    pub s_v: f64,
    pub mu_l: f64,
    pub mu_v: f64,
}

/// The saturated columns a volume/energy flash needs. Used both for values
/// and for their derivatives with respect to ln(P).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SatSlope {
    pub rho_l: f64,
    pub rho_v: f64,
    pub h_l: f64,
    pub h_v: f64,
}

const N_SAT_COLS: usize = 9;

pub(crate) struct SatTable {
    lnp: Vec<f64>,
    pressure: Vec<f64>,
    /// Node values, columns `T, rho_l, rho_v, h_l, h_v, s_l, s_v, mu_l, mu_v`.
    y: Vec<[f64; N_SAT_COLS]>,
    d: Vec<[f64; N_SAT_COLS]>,
}

impl SatTable {
    fn parse(text: &str) -> Self {
        let rows = parse_csv(text, 10);
        let pressure: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let lnp: Vec<f64> = pressure.iter().map(|p| p.ln()).collect();
        let cols: Vec<Vec<f64>> = (0..N_SAT_COLS)
            .map(|c| rows.iter().map(|r| r[c + 1]).collect())
            .collect();
        let n = lnp.len();
        let y = (0..n).map(|k| std::array::from_fn(|c| cols[c][k])).collect();
        let d = (0..n)
            .map(|k| std::array::from_fn(|c| slope_at(&lnp, &cols[c], k)))
            .collect();
        Self { lnp, pressure, y, d }
    }

    pub fn p_min(&self) -> f64 {
        self.pressure[0]
    }

    pub fn p_max(&self) -> f64 {
        self.pressure[self.pressure.len() - 1]
    }

    pub fn pressures(&self) -> &[f64] {
        &self.pressure
    }

    #[inline]
    fn interval(&self, p: f64) -> (usize, Basis) {
        let v = p.ln();
        let i = locate(&self.lnp, v);
        (i, Basis::new(self.lnp[i], self.lnp[i + 1], v))
    }

    #[inline]
    fn value(&self, i: usize, b: &Basis, c: usize) -> f64 {
        b.value(self.y[i][c], self.d[i][c], self.y[i + 1][c], self.d[i + 1][c])
    }

    #[inline]
    fn slope(&self, i: usize, b: &Basis, c: usize) -> f64 {
        b.slope(self.y[i][c], self.d[i][c], self.y[i + 1][c], self.d[i + 1][c])
    }

    pub fn eval(&self, p: f64) -> SatRow {
        let (i, b) = self.interval(p);
        let v: [f64; N_SAT_COLS] = std::array::from_fn(|c| self.value(i, &b, c));
        SatRow {
            t: v[0],
            rho_l: v[1],
            rho_v: v[2],
            h_l: v[3],
            h_v: v[4],
            s_l: v[5],
            s_v: v[6],
            mu_l: v[7],
            mu_v: v[8],
        }
    }

    pub fn eval_with_slope(&self, p: f64) -> (SatSlope, SatSlope) {
        let (i, b) = self.interval(p);
        let value = SatSlope {
            rho_l: self.value(i, &b, 1),
            rho_v: self.value(i, &b, 2),
            h_l: self.value(i, &b, 3),
            h_v: self.value(i, &b, 4),
        };
        let slope = SatSlope {
            rho_l: self.slope(i, &b, 1),
            rho_v: self.slope(i, &b, 2),
            h_l: self.slope(i, &b, 3),
            h_v: self.slope(i, &b, 4),
        };
        (value, slope)
    }

    /// `(T_sat, h_l, h_v)` only, at `v = ln P`.
    pub fn thermal_ln(&self, v: f64) -> (f64, f64, f64) {
        let i = locate(&self.lnp, v);
        let b = Basis::new(self.lnp[i], self.lnp[i + 1], v);
        (self.value(i, &b, 0), self.value(i, &b, 3), self.value(i, &b, 4))
    }

    /// Saturation temperature and its ln(P) derivative.
    pub fn temperature(&self, p: f64) -> (f64, f64) {
        let (i, b) = self.interval(p);
        (self.value(i, &b, 0), self.slope(i, &b, 0))
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.y[0][0], self.y[self.y.len() - 1][0])
    }
}

/// A family of rows, one per pressure node, each tabulated on a shared
/// normalized coordinate. Values at an arbitrary pressure are obtained by
/// interpolating each nearby row along the coordinate and then across rows.
pub(crate) struct RowTable<const C: usize> {
    lnp: Vec<f64>,
    coord: Vec<f64>,
    /// `y[c][row * coord.len() + k]`, node values along `coord`.
    y: [Vec<f64>; C],
    /// Matching PCHIP slopes along `coord`.
    d: [Vec<f64>; C],
    /// One per-row scalar (e.g. the enthalpy at coord = 0).
    row_scalar: Option<Pchip>,
}

impl<const C: usize> RowTable<C> {
    /// `rows` are grouped by pressure (column 0), coordinate in `coord_col`,
    /// values in `value_cols`; `scalar_col` is constant within a row.
    fn parse(
        rows: &[Vec<f64>],
        coord_col: usize,
        value_cols: [usize; C],
        scalar_col: Option<usize>,
    ) -> Self {
        let mut lnp = Vec::new();
        let mut groups: Vec<Vec<&Vec<f64>>> = Vec::new();
        for r in rows {
            let v = r[0].ln();
            if lnp.last() != Some(&v) {
                lnp.push(v);
                groups.push(Vec::new());
            }
            groups.last_mut().unwrap().push(r);
        }
        let coord: Vec<f64> = groups[0].iter().map(|r| r[coord_col]).collect();
        assert!(groups.iter().all(|g| g.len() == coord.len()), "ragged property table");
        let mut y: [Vec<f64>; C] = std::array::from_fn(|_| Vec::new());
        let mut d: [Vec<f64>; C] = std::array::from_fn(|_| Vec::new());
        for c in 0..C {
            for g in &groups {
                let ys: Vec<f64> = g.iter().map(|r| r[value_cols[c]]).collect();
                d[c].extend((0..ys.len()).map(|k| slope_at(&coord, &ys, k)));
                y[c].extend(ys);
            }
        }
        let row_scalar =
            scalar_col.map(|sc| Pchip::new(lnp.clone(), groups.iter().map(|g| g[0][sc]).collect()));
        Self {
            lnp,
            coord,
            y,
            d,
            row_scalar,
        }
    }

    /// Column `c` of row `row` along the coordinate, interval `j`.
    #[inline]
    fn along(&self, c: usize, row: usize, j: usize, b: &Basis) -> f64 {
        let k = row * self.coord.len() + j;
        b.value(self.y[c][k], self.d[c][k], self.y[c][k + 1], self.d[c][k + 1])
    }

    pub fn scalar(&self, p: f64) -> f64 {
        self.scalar_ln(p.ln())
    }

    /// Row scalar at `v = ln P`.
    pub fn scalar_ln(&self, v: f64) -> f64 {
        self.row_scalar.as_ref().expect("table has no row scalar").eval(v)
    }

    /// Value column `c` alone at `(ln P, coord)`.
    pub fn eval_col_ln(&self, v: f64, u: f64, c: usize) -> f64 {
        let i = locate(&self.lnp, v);
        let (lo, hi) = window(i, self.lnp.len());
        let j = locate(&self.coord, u);
        let b = Basis::value_only(self.coord[j], self.coord[j + 1], u);
        let mut ys = [0.0; 4];
        for (k, row) in (lo..=hi).enumerate() {
            ys[k] = self.along(c, row, j, &b);
        }
        window_value(&self.lnp[lo..=hi], &ys[..=hi - lo], i - lo, v)
    }

    /// All `C` values at `(p, coord)`.
    pub fn eval(&self, p: f64, u: f64) -> [f64; C] {
        let v = p.ln();
        let i = locate(&self.lnp, v);
        let (lo, hi) = window(i, self.lnp.len());
        let j = locate(&self.coord, u);
        let b = Basis::value_only(self.coord[j], self.coord[j + 1], u);
        let xs = &self.lnp[lo..=hi];
        std::array::from_fn(|c| {
            let mut ys = [0.0; 4];
            for (k, row) in (lo..=hi).enumerate() {
                ys[k] = self.along(c, row, j, &b);
            }
            window_value(xs, &ys[..=hi - lo], i - lo, v)
        })
    }
}

pub(crate) struct PropertyTables {
    pub sat: SatTable,
    /// Liquid: coord xi, values [dT, d_rho, d_s, d_mu]; scalar h_lo.
    pub liquid: RowTable<4>,
    /// Vapor: coord theta, values [rho, dh, ds, mu].
    pub vapor: RowTable<4>,
}

fn parse_csv(text: &str, ncols: usize) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let row: Vec<f64> = l
                .split(',')
                .map(|f| f.trim().parse::<f64>().expect("malformed property table"))
                .collect();
            assert_eq!(row.len(), ncols, "property table row width");
            row
        })
        .collect()
}

pub(crate) fn tables() -> &'static PropertyTables {
    static TABLES: OnceLock<PropertyTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let sat = SatTable::parse(SAT_CSV);
        let liquid_rows = parse_csv(LIQUID_CSV, 7);
        let liquid = RowTable::parse(&liquid_rows, 2, [3, 4, 5, 6], Some(1));
        let vapor_rows = parse_csv(VAPOR_CSV, 7);
        let vapor = RowTable::parse(&vapor_rows, 1, [3, 4, 5, 6], None);
        PropertyTables { sat, liquid, vapor }
    })
}
