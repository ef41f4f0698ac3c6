use std::fmt;

use super::{FieldSpec, LinalgError, Scalar};

/// Dense row-major matrix over a [`FieldSpec`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

/// Output of [`Matrix::row_reduce`]: `transform * a == rref`.
#[derive(Clone, Debug)]
pub struct RowReduction {
    pub rref: Matrix,
    pub rank: usize,
    pub transform: Matrix,
    pub pivots: Vec<usize>,
}

/// A kernel basis in reduced form: `basis` has one column per free column of
/// the RREF, carrying a 1 at its free index and 0 at the other free indices.
/// Coordinates of a kernel vector are therefore its entries at `free`.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub basis: Matrix,
    pub free: Vec<usize>,
}

impl Kernel {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Coordinates of `v` in the kernel basis, or `None` if `v` is not in the
    /// kernel span.
    pub fn coords(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let c: Vec<Scalar> = self.free.iter().map(|&j| v[j].clone()).collect();
        let back = self.basis.mul_vec(&c);
        if back.as_slice() == v {
            Some(c)
        } else {
            None
        }
    }
}

/// Quotient `V / W` with a chosen complement of standard basis vectors.
#[derive(Clone, Debug)]
pub struct Quotient {
    /// `dim(V/W) x dim(V)`: the projection along `W`.
    pub proj: Matrix,
    /// `dim(V) x dim(V/W)`: a section sending each quotient basis vector to a
    /// standard basis vector of `V`.
    pub section: Matrix,
    /// Indices of the standard basis vectors kept in the quotient.
    pub kept: Vec<usize>,
}

impl Quotient {
    /// `spanning` has `dim` rows; its columns span `W`.
    pub fn new(field: FieldSpec, dim: usize, spanning: &Matrix) -> Quotient {
        assert_eq!(spanning.rows(), dim);
        let red = spanning.transpose().rref_only();
        let pivots = red.1;
        let rref = red.0;
        let mut is_pivot = vec![None; dim];
        for (i, &p) in pivots.iter().enumerate() {
            is_pivot[p] = Some(i);
        }
        let kept: Vec<usize> = (0..dim).filter(|&j| is_pivot[j].is_none()).collect();
        let mut pos = vec![usize::MAX; dim];
        for (k, &j) in kept.iter().enumerate() {
            pos[j] = k;
        }
        let mut proj = Matrix::zeros(field, kept.len(), dim);
        let mut section = Matrix::zeros(field, dim, kept.len());
        for j in 0..dim {
            match is_pivot[j] {
                None => {
                    proj.set(pos[j], j, field.one());
                    section.set(j, pos[j], field.one());
                }
                Some(i) => {
                    for (k, &jj) in kept.iter().enumerate() {
                        let e = rref.get(i, jj);
                        if !e.is_zero() {
                            proj.set(k, j, -e);
                        }
                    }
                }
            }
        }
        Quotient {
            proj,
            section,
            kept,
        }
    }

    pub fn dim(&self) -> usize {
        self.kept.len()
    }
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Scalar>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Matrix {
            field,
            rows: r,
            cols: c,
            data,
        }
    }

    /// Convenience for small literal matrices.
    pub fn from_i64(field: FieldSpec, rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(
            field,
            rows.iter()
                .map(|r| r.iter().map(|&x| field.from_i64(x)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors (each of length `rows`).
    pub fn from_columns(field: FieldSpec, rows: usize, columns: &[Vec<Scalar>]) -> Matrix {
        let mut m = Matrix::zeros(field, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                if !x.is_zero() {
                    m.set(i, j, x.clone());
                }
            }
        }
        m
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Scalar) {
        self.data[i * self.cols + j] = x;
    }

    pub fn add_at(&mut self, i: usize, j: usize, x: &Scalar) {
        if x.is_zero() {
            return;
        }
        let k = i * self.cols + j;
        self.data[k] = &self.data[k] + x;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Scalar>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.get(i, j);
                if !x.is_zero() {
                    t.set(j, i, x.clone());
                }
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matrix product shape mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_at(i, j, &(a * b));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![self.field.zero(); self.rows];
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = self.get(i, j);
                if !a.is_zero() {
                    *o = &*o + &(a * x);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&self.field.from_i64(-1))
    }

    /// Places `blocks` side by side. All blocks must share a row count.
    pub fn hstack(field: FieldSpec, rows: usize, blocks: &[&Matrix]) -> Matrix {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            out.paste(0, off, b);
            off += b.cols;
        }
        out
    }

    pub fn vstack(field: FieldSpec, cols: usize, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.cols, cols);
            out.paste(off, 0, b);
            off += b.rows;
        }
        out
    }

    pub fn block_diag(field: FieldSpec, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.paste(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r, c)`.
    pub fn paste(&mut self, r: usize, c: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let x = block.get(i, j);
                if !x.is_zero() {
                    self.set(r + i, c + j, x.clone());
                }
            }
        }
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        let mut out = Matrix::zeros(self.field, rows.len(), cols.len());
        for (ii, i) in rows.clone().enumerate() {
            for (jj, j) in cols.clone().enumerate() {
                let x = self.get(i, j);
                if !x.is_zero() {
                    out.set(ii, jj, x.clone());
                }
            }
        }
        out
    }

    /// Reduces in place, pivoting only among the first `pivot_cols` columns.
    /// Returns the pivot columns in order.
    fn reduce_in_place(&mut self, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..pivot_cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("pivot is nonzero");
            if !inv.is_one() {
                for j in c..self.cols {
                    let x = self.get(r, j) * &inv;
                    self.set(r, j, x);
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let x = self.get(r, j);
                    if x.is_zero() {
                        continue;
                    }
                    let y = self.get(i, j) - &(&factor * x);
                    self.set(i, j, y);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn rref_only(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.reduce_in_place(self.cols);
        (m, pivots)
    }

    /// Reduced row-echelon form together with the invertible transform.
    pub fn row_reduce(&self) -> RowReduction {
        let id = Matrix::identity(self.field, self.rows);
        let mut aug = Matrix::hstack(self.field, self.rows, &[self, &id]);
        let pivots = aug.reduce_in_place(self.cols);
        RowReduction {
            rref: aug.submatrix(0..self.rows, 0..self.cols),
            rank: pivots.len(),
            transform: aug.submatrix(0..self.rows, self.cols..self.cols + self.rows),
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref_only().1.len()
    }

    /// Indices of a maximal independent subset of columns (first-found).
    pub fn independent_columns(&self) -> Vec<usize> {
        self.rref_only().1
    }

    pub fn kernel(&self) -> Kernel {
        let (rref, pivots) = self.rref_only();
        let mut is_pivot = vec![None; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            is_pivot[p] = Some(i);
        }
        let free: Vec<usize> = (0..self.cols).filter(|&j| is_pivot[j].is_none()).collect();
        let mut basis = Matrix::zeros(self.field, self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis.set(f, k, self.field.one());
            for (i, &p) in pivots.iter().enumerate() {
                let e = rref.get(i, f);
                if !e.is_zero() {
                    basis.set(p, k, -e);
                }
            }
        }
        Kernel { basis, free }
    }

    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        self.kernel().basis.columns()
    }

    /// Solves `self * x = b`; `Ok(None)` when `b` is outside the column space.
    pub fn solve(&self, b: &[Scalar]) -> Result<Option<Vec<Scalar>>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows,
                found: b.len(),
            });
        }
        let bcol = Matrix::from_columns(self.field, self.rows, &[b.to_vec()]);
        let mut aug = Matrix::hstack(self.field, self.rows, &[self, &bcol]);
        let pivots = aug.reduce_in_place(self.cols);
        for i in pivots.len()..self.rows {
            if !aug.get(i, self.cols).is_zero() {
                return Ok(None);
            }
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = aug.get(i, self.cols).clone();
        }
        Ok(Some(x))
    }

    /// Solves `self * X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Option<Matrix>, LinalgError> {
        if b.rows != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows,
                found: b.rows,
            });
        }
        let mut aug = Matrix::hstack(self.field, self.rows, &[self, b]);
        let pivots = aug.reduce_in_place(self.cols);
        for i in pivots.len()..self.rows {
            for j in 0..b.cols {
                if !aug.get(i, self.cols + j).is_zero() {
                    return Ok(None);
                }
            }
        }
        let mut x = Matrix::zeros(self.field, self.cols, b.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(p, j, aug.get(i, self.cols + j).clone());
            }
        }
        Ok(Some(x))
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Picks representatives of `span(ker) / span(im)` from the columns of
/// `ker` (the caller guarantees `span(im) ⊆ span(ker)`).
pub fn quotient_representatives(field: FieldSpec, dim: usize, ker: &Matrix, im: &Matrix) -> Matrix {
    let joined = Matrix::hstack(field, dim, &[im, ker]);
    let ind = joined.independent_columns();
    let chosen: Vec<Vec<Scalar>> = ind
        .into_iter()
        .filter(|&j| j >= im.cols())
        .map(|j| ker.col(j - im.cols()))
        .collect();
    Matrix::from_columns(field, dim, &chosen)
}

/// Matrix of the map induced by `f` on `ker_src/im_src -> ker_dst/im_dst`,
/// in the representative bases chosen by [`quotient_representatives`].
/// Subspaces are given as matrices whose columns span them.
pub fn induced_map_on_quotients(
    f: &Matrix,
    ker_src: &Matrix,
    im_src: &Matrix,
    ker_dst: &Matrix,
    im_dst: &Matrix,
) -> Result<Matrix, LinalgError> {
    let field = f.field();
    let reps_src = quotient_representatives(field, f.cols(), ker_src, im_src);
    let reps_dst = quotient_representatives(field, f.rows(), ker_dst, im_dst);
    for j in 0..im_src.cols() {
        let y = f.mul_vec(&im_src.col(j));
        if im_dst.solve(&y)?.is_none() {
            return Err(LinalgError::NotInSubspace {
                witness: im_src.col(j).iter().map(|x| x.to_string()).collect(),
            });
        }
    }
    let basis = Matrix::hstack(field, f.rows(), &[im_dst, &reps_dst]);
    let mut out = Matrix::zeros(field, reps_dst.cols(), reps_src.cols());
    for j in 0..reps_src.cols() {
        let y = f.mul_vec(&reps_src.col(j));
        let Some(x) = basis.solve(&y)? else {
            return Err(LinalgError::NotInSubspace {
                witness: reps_src.col(j).iter().map(|x| x.to_string()).collect(),
            });
        };
        for i in 0..reps_dst.cols() {
            out.set(i, j, x[im_dst.cols() + i].clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldSpec = FieldSpec::Rationals;

    #[test]
    fn identity_reduces_to_itself() {
        let id = Matrix::identity(Q, 2);
        let red = id.row_reduce();
        assert_eq!(red.rref, id);
        assert_eq!(red.rank, 2);
        assert_eq!(red.transform, id);
    }

    #[test]
    fn rank_one_example() {
        let a = Matrix::from_i64(Q, &[&[1, 2], &[2, 4]]);
        let red = a.row_reduce();
        assert_eq!(red.rref, Matrix::from_i64(Q, &[&[1, 2], &[0, 0]]));
        assert_eq!(red.rank, 1);
        assert_eq!(red.transform.mul(&a), red.rref);
        let k = a.kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![Q.from_i64(-2), Q.from_i64(1)]);
    }

    #[test]
    fn equal_rows_mod_two() {
        let f2 = FieldSpec::prime(2).unwrap();
        assert_eq!(Matrix::from_i64(f2, &[&[1, 1], &[1, 1]]).rank(), 1);
    }

    #[test]
    fn kernel_edge_cases() {
        assert!(Matrix::identity(Q, 3).kernel_basis().is_empty());
        assert_eq!(Matrix::zeros(Q, 2, 3).kernel_basis().len(), 3);
    }

    #[test]
    fn solve_examples() {
        let b = vec![Q.from_i64(3), Q.from_i64(-1)];
        assert_eq!(Matrix::identity(Q, 2).solve(&b).unwrap(), Some(b.clone()));
        let a = Matrix::from_i64(Q, &[&[1, 0], &[0, 0]]);
        assert_eq!(a.solve(&[Q.zero(), Q.one()]).unwrap(), None);
        let two = Matrix::from_i64(Q, &[&[2]]);
        let x = two.solve(&[Q.one()]).unwrap().unwrap();
        assert_eq!(x[0].to_string(), "1/2");
        assert!(two.solve(&[Q.one(), Q.one()]).is_err());
    }

    #[test]
    fn quotient_projection_kills_subspace() {
        let w = Matrix::from_i64(Q, &[&[1], &[1], &[0]]);
        let quo = Quotient::new(Q, 3, &w);
        assert_eq!(quo.dim(), 2);
        assert!(quo.proj.mul(&w).is_zero());
        assert_eq!(quo.proj.mul(&quo.section), Matrix::identity(Q, 2));
    }

    #[test]
    fn induced_maps() {
        let id = Matrix::identity(Q, 2);
        let empty = Matrix::zeros(Q, 2, 0);
        let h = induced_map_on_quotients(&id, &id, &empty, &id, &empty).unwrap();
        assert_eq!(h, id);
        let zero = Matrix::zeros(Q, 2, 2);
        let h0 = induced_map_on_quotients(&zero, &id, &empty, &id, &empty).unwrap();
        assert!(h0.is_zero());
        // the second class maps onto a boundary
        let f = Matrix::from_i64(Q, &[&[1, 0], &[0, 1]]);
        let im_dst = Matrix::from_i64(Q, &[&[0], &[1]]);
        let h1 = induced_map_on_quotients(&f, &id, &empty, &id, &im_dst).unwrap();
        assert_eq!(h1.rows(), 1);
        assert!(h1.get(0, 1).is_zero());
        assert!(!h1.get(0, 0).is_zero());
    }

    #[test]
    fn induced_map_rejects_non_cycle_image() {
        let f = Matrix::identity(Q, 2);
        let ker_src = Matrix::from_i64(Q, &[&[1], &[0]]);
        let empty = Matrix::zeros(Q, 2, 0);
        let ker_dst = Matrix::from_i64(Q, &[&[0], &[1]]);
        assert!(induced_map_on_quotients(&f, &ker_src, &empty, &ker_dst, &empty).is_err());
    }
}
