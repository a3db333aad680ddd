use std::fmt;

use crate::Scalar;

/// Named parameter values in a model's fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector<T> {
    names: &'static [&'static str],
    values: Vec<T>,
}

impl<T: Scalar> ParamVector<T> {
    /// Panics if the lengths differ or a name repeats; parameter name lists
    /// are compile-time constants of each model.
    pub fn new(names: &'static [&'static str], values: Vec<T>) -> Self {
        assert_eq!(names.len(), values.len(), "parameter count mismatch");
        for (i, n) in names.iter().enumerate() {
            assert!(!names[..i].contains(n), "duplicate parameter name {n}");
        }
        Self { names, values }
    }

    pub fn names(&self) -> &'static [&'static str] {
        self.names
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|i| self.values[i])
    }

    pub fn set(&mut self, index: usize, value: T) {
        self.values[index] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, T)> + '_ {
        self.names.iter().copied().zip(self.values.iter().copied())
    }
}

impl<T> std::ops::Index<usize> for ParamVector<T> {
    type Output = T;

    fn index(&self, index: usize) -> &T {
        &self.values[index]
    }
}

impl<T: Scalar> fmt::Display for ParamVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, v)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}={v}")?;
        }
        Ok(())
    }
}
