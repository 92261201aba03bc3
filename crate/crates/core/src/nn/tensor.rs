use super::NnError;

/// Dense row-major `f64` array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn from_vec(shape: Vec<usize>, data: Vec<f64>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "data length does not match shape {shape:?}"
        );
        Self { shape, data }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn zeros_like(other: &Tensor) -> Self {
        Self::zeros(&other.shape)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(1)
    }

    /// Product of all but the first dimension.
    pub fn cols(&self) -> usize {
        self.shape.iter().skip(1).product()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn add_assign(&mut self, other: &Tensor) -> Result<(), NnError> {
        check_shape("add_assign", &self.shape, &other.shape)?;
        axpy(1.0, &other.data, &mut self.data);
        Ok(())
    }

    pub fn scale(&mut self, k: f64) {
        self.data.iter_mut().for_each(|v| *v *= k);
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `out = self · x` for a 2-d tensor.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        matvec(&self.data, self.rows(), self.cols(), x, out);
    }
}

pub fn check_shape(
    context: &'static str,
    expected: &[usize],
    found: &[usize],
) -> Result<(), NnError> {
    if expected == found {
        Ok(())
    } else {
        Err(NnError::ShapeMismatch {
            context,
            expected: expected.to_vec(),
            found: found.to_vec(),
        })
    }
}

pub fn check_len(context: &'static str, expected: usize, found: usize) -> Result<(), NnError> {
    check_shape(context, &[expected], &[found])
}

/// Dot product with four independent accumulators.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `out = W x` with `W` row-major `rows × cols`.
#[inline]
pub fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    for (o, row) in out[..rows].iter_mut().zip(w.chunks_exact(cols)) {
        *o = dot(row, x);
    }
}

/// `out += Wᵀ g`
#[inline]
pub fn matvec_t_acc(w: &[f64], rows: usize, cols: usize, g: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.len(), rows * cols);
    for (gi, row) in g[..rows].iter().zip(w.chunks_exact(cols)) {
        if *gi != 0.0 {
            axpy(*gi, row, &mut out[..cols]);
        }
    }
}

/// `W += g xᵀ`
#[inline]
pub fn outer_acc(w: &mut [f64], g: &[f64], x: &[f64]) {
    let cols = x.len();
    for (gi, row) in g.iter().zip(w.chunks_exact_mut(cols)) {
        if *gi != 0.0 {
            axpy(*gi, x, row);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_match_naive() {
        let w: Vec<f64> = (0..15).map(|i| i as f64 * 0.5 - 3.0).collect();
        let x = [1.0, -2.0, 0.5, 3.0, 0.25];
        let mut out = [0.0; 3];
        matvec(&w, 3, 5, &x, &mut out);
        for i in 0..3 {
            let naive: f64 = (0..5).map(|j| w[i * 5 + j] * x[j]).sum();
            assert!((out[i] - naive).abs() < 1e-12);
        }
        let g = [1.0, 0.0, -1.0];
        let mut acc = [0.0; 5];
        matvec_t_acc(&w, 3, 5, &g, &mut acc);
        for j in 0..5 {
            let naive: f64 = (0..3).map(|i| w[i * 5 + j] * g[i]).sum();
            assert!((acc[j] - naive).abs() < 1e-12);
        }
        let mut m = vec![0.0; 15];
        outer_acc(&mut m, &g, &x);
        assert_eq!(m[2 * 5 + 3], -3.0);
    }

    #[test]
    #[should_panic]
    fn shape_must_match_data() {
        Tensor::from_vec(vec![2, 3], vec![0.0; 5]);
    }

    #[test]
    fn add_assign_checks_shape() {
        let mut a = Tensor::zeros(&[2, 2]);
        assert!(a.add_assign(&Tensor::zeros(&[4])).is_err());
        a.add_assign(&Tensor::from_vec(vec![2, 2], vec![1.0; 4]))
            .unwrap();
        assert_eq!(a.data(), &[1.0; 4]);
    }
}
