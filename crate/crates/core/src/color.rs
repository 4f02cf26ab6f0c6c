//! Binary edge-by-color membership matrix attached to a BOSS graph.

use thiserror::Error;

use crate::bitseq::RawBits;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColorError {
    #[error("color matrix has {rows} rows but the graph has {expected} W entries")]
    RowMismatch { rows: usize, expected: usize },
}

/// Row `i` (0-based) describes the `W` entry at position `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorMatrix {
    rows: usize,
    cols: usize,
    bits: RawBits,
}

impl ColorMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, bits: RawBits::zeros(rows * cols) }
    }

    pub fn from_rows<I, R>(cols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[bool]>,
    {
        let mut bits = RawBits::with_capacity(0);
        let mut count = 0;
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "row {count} has {} columns, expected {cols}", row.len());
            for &b in row {
                bits.push(b);
            }
            count += 1;
        }
        Self { rows: count, cols, bits }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols);
        self.bits.get(row * self.cols + col)
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.rows && col < self.cols);
        self.bits.set(row * self.cols + col, value);
    }

    pub fn row(&self, row: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    /// Appends a row of `cols` zeros and returns its index.
    pub fn push_zero_row(&mut self) -> usize {
        for _ in 0..self.cols {
            self.bits.push(false);
        }
        self.rows += 1;
        self.rows - 1
    }

    pub fn check_rows(&self, expected: usize) -> Result<(), ColorError> {
        if self.rows != expected {
            return Err(ColorError::RowMismatch { rows: self.rows, expected });
        }
        Ok(())
    }

    /// Row rendered as `0`/`1` characters, column 0 first.
    pub fn row_string(&self, row: usize) -> String {
        self.row(row).iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}
