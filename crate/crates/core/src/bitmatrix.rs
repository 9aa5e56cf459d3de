//! Square matrices over GF(2) of dimension at most 32, stored as row bitmasks.

use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    /// Bit `j` of `rows[i]` is entry `(i, j)`.
    rows: Vec<u32>,
}

impl BitMatrix {
    pub fn zero(n: usize) -> Self {
        assert!(n <= 32, "BitMatrix supports dimension at most 32");
        BitMatrix {
            n,
            rows: vec![0; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.rows[i] = 1 << i;
        }
        m
    }

    /// Builds the matrix whose `j`-th column is the bit vector `cols[j]`.
    pub fn from_columns(cols: &[u32]) -> Self {
        let n = cols.len();
        let mut m = Self::zero(n);
        for (j, &c) in cols.iter().enumerate() {
            for i in 0..n {
                if (c >> i) & 1 == 1 {
                    m.rows[i] |= 1 << j;
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        if v {
            self.rows[i] |= 1 << j;
        } else {
            self.rows[i] &= !(1 << j);
        }
    }

    pub fn row(&self, i: usize) -> u32 {
        self.rows[i]
    }

    pub fn column(&self, j: usize) -> u32 {
        (0..self.n).fold(0, |acc, i| acc | (((self.rows[i] >> j) & 1) << i))
    }

    /// Matrix-vector product `M v`.
    pub fn apply(&self, v: u32) -> u32 {
        (0..self.n).fold(0, |acc, i| {
            acc | (((self.rows[i] & v).count_ones() & 1) << i)
        })
    }

    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out = Self::zero(self.n);
        for i in 0..self.n {
            let mut acc = 0u32;
            let mut r = self.rows[i];
            while r != 0 {
                let k = r.trailing_zeros() as usize;
                acc ^= rhs.rows[k];
                r &= r - 1;
            }
            out.rows[i] = acc;
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(p) = (rank..self.n).find(|&r| (rows[r] >> col) & 1 == 1) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && (*row >> col) & 1 == 1 {
                    *row ^= pivot;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Gauss-Jordan inversion; `None` when singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        let n = self.n;
        let mut a = self.rows.clone();
        let mut inv = Self::identity(n).rows;
        for col in 0..n {
            let p = (col..n).find(|&r| (a[r] >> col) & 1 == 1)?;
            a.swap(col, p);
            inv.swap(col, p);
            let (pa, pi) = (a[col], inv[col]);
            for r in 0..n {
                if r != col && (a[r] >> col) & 1 == 1 {
                    a[r] ^= pa;
                    inv[r] ^= pi;
                }
            }
        }
        Some(BitMatrix { n, rows: inv })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            for j in 0..self.n {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
