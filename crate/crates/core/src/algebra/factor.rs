use std::collections::BTreeSet;

use super::{Assignment, Complex, Semantics, VarId};
use crate::error::{Error, Result};

/// Dense complex table over an ordered scope of cyclic-group variables.
///
/// Row-major, first scope variable slowest. A factor with an empty scope
/// holds exactly one value.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    vars: Vec<VarId>,
    dims: Vec<usize>,
    values: Vec<Complex>,
}

pub(crate) fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for d in (0..dims.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * dims[d + 1];
    }
    strides
}

/// Row-major walk over `dims`, handing `visit` the running offsets into two
/// tables laid out by `sa` and `sb` (stride 0 on axes a table does not have).
pub(crate) fn walk2(
    dims: &[usize],
    sa: &[usize],
    sb: &[usize],
    mut visit: impl FnMut(usize, usize),
) {
    let total: usize = dims.iter().product();
    let nd = dims.len();
    let mut counter = vec![0usize; nd];
    let (mut oa, mut ob) = (0usize, 0usize);
    for _ in 0..total {
        visit(oa, ob);
        let mut d = nd;
        while d > 0 {
            d -= 1;
            counter[d] += 1;
            oa += sa[d];
            ob += sb[d];
            if counter[d] < dims[d] {
                break;
            }
            oa -= sa[d] * dims[d];
            ob -= sb[d] * dims[d];
            counter[d] = 0;
        }
    }
}

impl Factor {
    pub fn new(scope: Vec<(VarId, usize)>, values: Vec<Complex>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(v, n) in &scope {
            if !seen.insert(v) {
                return Err(Error::DuplicateVariable(v));
            }
            if n == 0 {
                return Err(Error::EmptyDomain(v));
            }
        }
        let (vars, dims): (Vec<_>, Vec<_>) = scope.into_iter().unzip();
        let expected = dims.iter().product::<usize>();
        if values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Factor { vars, dims, values })
    }

    pub fn from_real(scope: &[(VarId, usize)], values: &[f64]) -> Result<Self> {
        Factor::new(
            scope.to_vec(),
            values.iter().map(|&x| Complex::new(x, 0.0)).collect(),
        )
    }

    pub fn scalar(value: Complex) -> Self {
        Factor {
            vars: Vec::new(),
            dims: Vec::new(),
            values: vec![value],
        }
    }

    pub fn constant(scope: &[(VarId, usize)], value: Complex) -> Result<Self> {
        let len = scope.iter().map(|s| s.1).product();
        Factor::new(scope.to_vec(), vec![value; len])
    }

    /// Unit mass at `at`, zero elsewhere. `at` is indexed like the scope.
    pub fn delta(scope: &[(VarId, usize)], at: &[usize]) -> Result<Self> {
        let mut f = Factor::constant(scope, Complex::new(0.0, 0.0))?;
        let offset = f.offset(at)?;
        f.values[offset] = Complex::new(1.0, 0.0);
        Ok(f)
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn scope(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.vars.iter().copied().zip(self.dims.iter().copied())
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn position(&self, var: VarId) -> Option<usize> {
        self.vars.iter().position(|&v| v == var)
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.position(var).is_some()
    }

    pub fn dim_of(&self, var: VarId) -> Option<usize> {
        self.position(var).map(|p| self.dims[p])
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.dims)
    }

    fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(Error::ShapeMismatch {
                expected: self.dims.len(),
                actual: index.len(),
            });
        }
        let mut offset = 0;
        for (d, (&i, &n)) in index.iter().zip(&self.dims).enumerate() {
            if i >= n {
                return Err(Error::ValueOutOfDomain {
                    var: self.vars[d],
                    value: i,
                    size: n,
                });
            }
            offset = offset * n + i;
        }
        Ok(offset)
    }

    pub fn get(&self, index: &[usize]) -> Result<Complex> {
        Ok(self.values[self.offset(index)?])
    }

    /// The single value of a zero-scope factor.
    pub fn scalar_value(&self) -> Option<Complex> {
        self.is_scalar().then(|| self.values[0])
    }

    pub fn total(&self) -> Complex {
        self.values.iter().sum()
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Factor {
        Factor {
            vars: self.vars.clone(),
            dims: self.dims.clone(),
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, by: Complex) -> Factor {
        self.map(|z| z * by)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// Ordered union of both scopes: `self`'s variables, then `other`'s new ones.
    fn union_scope(&self, other: &Factor) -> Result<(Vec<VarId>, Vec<usize>)> {
        let mut vars = self.vars.clone();
        let mut dims = self.dims.clone();
        for (v, n) in other.scope() {
            match self.dim_of(v) {
                Some(m) if m != n => {
                    return Err(Error::DomainMismatch {
                        var: v,
                        left: m,
                        right: n,
                    })
                }
                Some(_) => {}
                None => {
                    vars.push(v);
                    dims.push(n);
                }
            }
        }
        Ok((vars, dims))
    }

    /// Strides of `self` laid against `out_vars`; zero where `self` lacks the axis.
    fn strides_along(&self, out_vars: &[VarId]) -> Vec<usize> {
        let own = self.strides();
        out_vars
            .iter()
            .map(|&v| self.position(v).map_or(0, |p| own[p]))
            .collect()
    }

    /// Pointwise product over the union of scopes.
    pub fn multiply(&self, other: &Factor) -> Result<Factor> {
        let (vars, dims) = self.union_scope(other)?;
        let sa = self.strides_along(&vars);
        let sb = other.strides_along(&vars);
        let mut values = Vec::with_capacity(dims.iter().product());
        walk2(&dims, &sa, &sb, |a, b| {
            values.push(self.values[a] * other.values[b])
        });
        Ok(Factor { vars, dims, values })
    }

    /// Generalized convolution: cyclic convolution along the shared variables,
    /// the remaining variables carried along as parameters.
    ///
    /// With no shared variables this is exactly [`Factor::multiply`].
    pub fn convolve(&self, other: &Factor) -> Result<Factor> {
        let (vars, dims) = self.union_scope(other)?;
        let shared: Vec<usize> = (0..self.vars.len())
            .filter(|&p| other.contains(self.vars[p]))
            .collect();
        if shared.is_empty() {
            return self.multiply(other);
        }
        let out_strides = strides_of(&dims);
        let ns = shared.len();
        let shared_dims: Vec<usize> = shared.iter().map(|&p| self.dims[p]).collect();
        let shared_strides: Vec<usize> = shared.iter().map(|&p| out_strides[p]).collect();

        // Per-entry split of each operand into (offset over its private axes, shared coordinates).
        let split = |f: &Factor| -> (Vec<usize>, Vec<usize>) {
            let mut private = Vec::with_capacity(f.len());
            let mut coords = Vec::with_capacity(f.len() * ns);
            let axis_out: Vec<usize> = f
                .vars
                .iter()
                .map(|v| vars.iter().position(|w| w == v).unwrap())
                .collect();
            let shared_slot: Vec<Option<usize>> = f
                .vars
                .iter()
                .map(|v| shared.iter().position(|&p| self.vars[p] == *v))
                .collect();
            let mut idx = vec![0usize; f.dims.len()];
            let mut row = vec![0usize; ns];
            for _ in 0..f.len() {
                let mut off = 0;
                for (d, &i) in idx.iter().enumerate() {
                    match shared_slot[d] {
                        Some(s) => row[s] = i,
                        None => off += i * out_strides[axis_out[d]],
                    }
                }
                private.push(off);
                coords.extend_from_slice(&row);
                let mut d = idx.len();
                while d > 0 {
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < f.dims[d] {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            (private, coords)
        };
        let (fp, fc) = split(self);
        let (gp, gc) = split(other);

        let mut values = vec![Complex::new(0.0, 0.0); dims.iter().product()];
        if ns == 1 {
            let (n, s) = (shared_dims[0], shared_strides[0]);
            for (i, &fv) in self.values.iter().enumerate() {
                if fv == Complex::new(0.0, 0.0) {
                    continue;
                }
                let (base, t) = (fp[i], fc[i]);
                for (j, &gv) in other.values.iter().enumerate() {
                    let mut k = t + gc[j];
                    if k >= n {
                        k -= n;
                    }
                    values[base + gp[j] + k * s] += fv * gv;
                }
            }
        } else {
            for (i, &fv) in self.values.iter().enumerate() {
                if fv == Complex::new(0.0, 0.0) {
                    continue;
                }
                let ft = &fc[i * ns..(i + 1) * ns];
                for (j, &gv) in other.values.iter().enumerate() {
                    let gt = &gc[j * ns..(j + 1) * ns];
                    let mut off = fp[i] + gp[j];
                    for t in 0..ns {
                        let mut k = ft[t] + gt[t];
                        if k >= shared_dims[t] {
                            k -= shared_dims[t];
                        }
                        off += k * shared_strides[t];
                    }
                    values[off] += fv * gv;
                }
            }
        }
        Ok(Factor { vars, dims, values })
    }

    /// Combine under the given semantics.
    pub fn combine(&self, other: &Factor, semantics: Semantics) -> Result<Factor> {
        match semantics {
            Semantics::Convolutional => self.convolve(other),
            Semantics::Multiplicative => self.multiply(other),
        }
    }

    /// Sum out `vars`. Every id must be in scope.
    pub fn marginalize(&self, vars: &[VarId]) -> Result<Factor> {
        for &v in vars {
            if !self.contains(v) {
                return Err(Error::UnknownVariable(v));
            }
        }
        if vars.is_empty() {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&p| !vars.contains(&self.vars[p]))
            .collect();
        let out_vars: Vec<VarId> = keep.iter().map(|&p| self.vars[p]).collect();
        let out_dims: Vec<usize> = keep.iter().map(|&p| self.dims[p]).collect();
        let out_own = strides_of(&out_dims);
        let out_strides: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                out_vars
                    .iter()
                    .position(|w| w == v)
                    .map_or(0, |q| out_own[q])
            })
            .collect();
        let mut values = vec![Complex::new(0.0, 0.0); out_dims.iter().product()];
        let mut i = 0;
        let unit = vec![0; self.dims.len()];
        walk2(&self.dims, &out_strides, &unit, |o, _| {
            values[o] += self.values[i];
            i += 1;
        });
        Ok(Factor {
            vars: out_vars,
            dims: out_dims,
            values,
        })
    }

    /// Sum out everything except `keep` (ids not in scope are ignored).
    pub fn marginalize_to(&self, keep: &[VarId]) -> Factor {
        let drop: Vec<VarId> = self
            .vars
            .iter()
            .copied()
            .filter(|v| !keep.contains(v))
            .collect();
        self.marginalize(&drop)
            .expect("dropped ids come from the scope")
    }

    /// Slice at the evidenced coordinates. Every evidenced id must be in scope.
    pub fn evaluate(&self, evidence: &Assignment) -> Result<Factor> {
        let mut base = 0;
        let strides = self.strides();
        for (v, x) in evidence.iter() {
            let p = self.position(v).ok_or(Error::UnknownVariable(v))?;
            if x >= self.dims[p] {
                return Err(Error::ValueOutOfDomain {
                    var: v,
                    value: x,
                    size: self.dims[p],
                });
            }
            base += x * strides[p];
        }
        if evidence.is_empty() {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&p| !evidence.contains(self.vars[p]))
            .collect();
        let out_vars: Vec<VarId> = keep.iter().map(|&p| self.vars[p]).collect();
        let out_dims: Vec<usize> = keep.iter().map(|&p| self.dims[p]).collect();
        let in_strides: Vec<usize> = keep.iter().map(|&p| strides[p]).collect();
        let mut values = Vec::with_capacity(out_dims.iter().product());
        let unit = vec![0; out_dims.len()];
        walk2(&out_dims, &in_strides, &unit, |i, _| {
            values.push(self.values[base + i])
        });
        Ok(Factor {
            vars: out_vars,
            dims: out_dims,
            values,
        })
    }

    /// Slice at the part of `evidence` that falls inside the scope.
    pub fn evaluate_within(&self, evidence: &Assignment) -> Result<Factor> {
        self.evaluate(&evidence.restrict(|v| self.contains(v)))
    }

    /// Rescale to unit total. Requires a real, non-negative table.
    pub fn normalize(&self) -> Result<Factor> {
        if let Some(bad) = self
            .values
            .iter()
            .find(|z| z.im.abs() > 1e-12 || z.re < -1e-12)
        {
            return Err(Error::NotReal(bad.to_string()));
        }
        let total = self.total().re;
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::ZeroTotal(total));
        }
        Ok(self.map(|z| Complex::new(z.re / total, 0.0)))
    }

    /// Same function with its scope reordered to `order` (a permutation of the scope).
    pub fn permuted(&self, order: &[VarId]) -> Result<Factor> {
        if order.len() != self.vars.len() {
            return Err(Error::ShapeMismatch {
                expected: self.vars.len(),
                actual: order.len(),
            });
        }
        let strides = self.strides();
        let mut dims = Vec::with_capacity(order.len());
        let mut in_strides = Vec::with_capacity(order.len());
        for &v in order {
            let p = self.position(v).ok_or(Error::UnknownVariable(v))?;
            dims.push(self.dims[p]);
            in_strides.push(strides[p]);
        }
        if order == self.vars.as_slice() {
            return Ok(self.clone());
        }
        let mut values = Vec::with_capacity(self.len());
        let unit = vec![0; dims.len()];
        walk2(&dims, &in_strides, &unit, |i, _| {
            values.push(self.values[i])
        });
        Ok(Factor {
            vars: order.to_vec(),
            dims,
            values,
        })
    }

    /// L∞ distance after aligning `other` to this scope order.
    pub fn max_abs_diff(&self, other: &Factor) -> Result<f64> {
        let aligned = other.permuted(&self.vars)?;
        if aligned.dims != self.dims {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&aligned.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `‖self − reference‖∞ / ‖reference‖∞`; zero when both vanish.
    pub fn relative_linf(&self, reference: &Factor) -> Result<f64> {
        let diff = self.max_abs_diff(reference)?;
        let scale = reference.max_abs();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

/// Fold of `multiply` or `convolve` over `factors`; the empty product is the scalar 1.
pub fn product_all<'a, I>(factors: I, semantics: Semantics) -> Result<Factor>
where
    I: IntoIterator<Item = &'a Factor>,
{
    let mut iter = factors.into_iter();
    let Some(first) = iter.next() else {
        return Ok(Factor::scalar(Complex::new(1.0, 0.0)));
    };
    iter.try_fold(first.clone(), |acc, f| acc.combine(f, semantics))
}
