use crate::error::{Error, Result};

/// Response vector and design matrix with the per-column summaries every
/// model evaluation needs. Immutable once built.
///
/// The design is stored column-major so that `x_j^T x_k` is a contiguous
/// dot product.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    p: usize,
    y: Vec<f64>,
    x: Vec<f64>,
    names: Vec<String>,
    xty: Vec<f64>,
    col_sq: Vec<f64>,
    col_sum: Vec<f64>,
    yty: f64,
    y_sum: f64,
}

impl Dataset {
    /// Builds a dataset from a column-major `n x p` design.
    pub fn from_column_major(
        y: Vec<f64>,
        x: Vec<f64>,
        p: usize,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::Data(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if p < 1 {
            return Err(Error::Data("need at least one covariate".into()));
        }
        if x.len() != n * p {
            return Err(Error::Data(format!(
                "design has {} entries, expected n * p = {} * {}",
                x.len(),
                n,
                p
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("response entry {i} is not finite")));
        }
        if let Some(idx) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "design entry (row {}, column {}) is not finite",
                idx % n,
                idx / n
            )));
        }
        let names = match names {
            Some(names) if names.len() == p => names,
            Some(names) => {
                return Err(Error::Data(format!(
                    "{} column names for {} covariates",
                    names.len(),
                    p
                )))
            }
            None => (1..=p).map(|j| format!("x{j}")).collect(),
        };

        let mut xty = Vec::with_capacity(p);
        let mut col_sq = Vec::with_capacity(p);
        let mut col_sum = Vec::with_capacity(p);
        for col in x.chunks_exact(n) {
            xty.push(dot(col, &y));
            col_sq.push(dot(col, col));
            col_sum.push(col.iter().sum());
        }
        let yty = dot(&y, &y);
        let y_sum = y.iter().sum();
        Ok(Self {
            n,
            p,
            y,
            x,
            names,
            xty,
            col_sq,
            col_sum,
            yty,
            y_sum,
        })
    }

    pub fn from_columns(y: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = y.len();
        let p = columns.len();
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::Data(format!(
                "column {j} has {} rows, response has {n}",
                c.len()
            )));
        }
        let x = columns.into_iter().flatten().collect();
        Self::from_column_major(y, x, p, None)
    }

    /// Builds a dataset from row-major covariate rows.
    pub fn from_rows(y: Vec<f64>, rows: &[Vec<f64>], names: Option<Vec<String>>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if y.len() != n {
            return Err(Error::Data(format!("{} responses for {n} rows", y.len())));
        }
        let mut x = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Data(format!(
                    "row {i} has {} covariates, expected {p}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                x[j * n + i] = *v;
            }
        }
        Self::from_column_major(y, x, p, names)
    }

    /// Centres every column and scales it to unit sample variance. Constant
    /// columns are centred only.
    pub fn standardized(&self) -> Self {
        let n = self.n as f64;
        let mut x = self.x.clone();
        for col in x.chunks_exact_mut(self.n) {
            let mean = col.iter().sum::<f64>() / n;
            col.iter_mut().for_each(|v| *v -= mean);
            let sd = (dot(col, col) / (n - 1.0)).sqrt();
            if sd > 0.0 {
                col.iter_mut().for_each(|v| *v /= sd);
            }
        }
        Self::from_column_major(self.y.clone(), x, self.p, Some(self.names.clone()))
            .expect("standardizing keeps a valid dataset valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.x[j * self.n..(j + 1) * self.n]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// `x_j^T y` for every column.
    pub fn xty(&self) -> &[f64] {
        &self.xty
    }

    /// `x_j^T x_j` for every column.
    pub fn col_sq(&self) -> &[f64] {
        &self.col_sq
    }

    /// `1_n^T x_j` for every column.
    pub fn col_sum(&self) -> &[f64] {
        &self.col_sum
    }

    pub fn yty(&self) -> f64 {
        self.yty
    }

    pub fn y_sum(&self) -> f64 {
        self.y_sum
    }

    /// `x_j^T x_k`.
    pub fn cross(&self, j: usize, k: usize) -> f64 {
        if j == k {
            self.col_sq[j]
        } else {
            dot(self.column(j), self.column(k))
        }
    }

    /// `X^T x_k`, one entry per column.
    pub fn cross_column(&self, k: usize) -> Vec<f64> {
        let xk = self.column(k);
        (0..self.p)
            .map(|j| {
                if j == k {
                    self.col_sq[k]
                } else {
                    dot(self.column(j), xk)
                }
            })
            .collect()
    }

    /// Row `i` of the design, copied.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.x[j * self.n + i]).collect()
    }
}

/// Dot product with a fixed four-lane summation order. The order only
/// depends on the length, so `dot(a, b) == dot(b, a)` bit for bit.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
