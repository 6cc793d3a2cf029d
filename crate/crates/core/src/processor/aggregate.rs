//! Associative window aggregates.

use std::fmt::Debug;
use std::marker::PhantomData;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `combine` must be associative and `add(a, e)` must equal
/// `combine(a, add(empty, e))`, so that folding panes gives the same result
/// as folding the window directly.
pub trait Aggregator {
    type Item;
    type Acc: Clone + Debug;
    type Output;

    fn empty(&self) -> Self::Acc;
    fn add(&self, acc: &mut Self::Acc, item: &Self::Item);
    fn combine(&self, left: &Self::Acc, right: &Self::Acc) -> Self::Acc;
    fn finalize(&self, acc: &Self::Acc) -> Self::Output;

    fn fold<'a>(&self, items: impl IntoIterator<Item = &'a Self::Item>) -> Self::Output
    where
        Self::Item: 'a,
    {
        let mut acc = self.empty();
        for item in items {
            self.add(&mut acc, item);
        }
        self.finalize(&acc)
    }
}

/// Number of items, whatever their type.
#[derive(Debug, Clone, Copy, Default)]
pub struct Count<I>(PhantomData<fn(&I)>);

impl<I> Count<I> {
    pub fn new() -> Self {
        Count(PhantomData)
    }
}

impl<I> Aggregator for Count<I> {
    type Item = I;
    type Acc = u64;
    type Output = u64;

    fn empty(&self) -> u64 {
        0
    }

    fn add(&self, acc: &mut u64, _: &I) {
        *acc += 1;
    }

    fn combine(&self, left: &u64, right: &u64) -> u64 {
        left + right
    }

    fn finalize(&self, acc: &u64) -> u64 {
        *acc
    }
}

/// The window content itself; mostly useful for testing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Collect<I>(PhantomData<fn(&I)>);

impl<I> Collect<I> {
    pub fn new() -> Self {
        Collect(PhantomData)
    }
}

impl<I: Clone + Debug> Aggregator for Collect<I> {
    type Item = I;
    type Acc = Vec<I>;
    type Output = Vec<I>;

    fn empty(&self) -> Vec<I> {
        Vec::new()
    }

    fn add(&self, acc: &mut Vec<I>, item: &I) {
        acc.push(item.clone());
    }

    fn combine(&self, left: &Vec<I>, right: &Vec<I>) -> Vec<I> {
        let mut out = left.clone();
        out.extend(right.iter().cloned());
        out
    }

    fn finalize(&self, acc: &Vec<I>) -> Vec<I> {
        acc.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumericOp {
    Count,
    Sum,
    Min,
    Max,
    Average,
    First,
    Last,
}

impl NumericOp {
    pub const ALL: [NumericOp; 7] = [
        NumericOp::Count,
        NumericOp::Sum,
        NumericOp::Min,
        NumericOp::Max,
        NumericOp::Average,
        NumericOp::First,
        NumericOp::Last,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NumericOp::Count => "count",
            NumericOp::Sum => "sum",
            NumericOp::Min => "min",
            NumericOp::Max => "max",
            NumericOp::Average => "average",
            NumericOp::First => "first",
            NumericOp::Last => "last",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|op| op.name() == name || (name == "avg" && *op == NumericOp::Average))
            .ok_or_else(|| Error::Document(format!("unknown aggregate '{name}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericAcc<S> {
    count: u64,
    sum: S,
    min: Option<S>,
    max: Option<S>,
    first: Option<S>,
    last: Option<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AggValue<S> {
    Count(u64),
    Exact(S),
    Float(f64),
    /// Min, max, first, last or average of no items.
    Empty,
}

impl<S: Scalar> AggValue<S> {
    pub fn to_json(&self) -> Value {
        match self {
            AggValue::Count(n) => Value::from(*n),
            AggValue::Exact(v) => v.to_json(),
            AggValue::Float(f) => Value::from(*f),
            AggValue::Empty => Value::Null,
        }
    }
}

/// Count, sum, min, max, average, first or last of numeric items. Exact
/// scalars aggregate exactly; the average is finalized to `f64`.
#[derive(Debug, Clone, Copy)]
pub struct NumericAgg<S> {
    op: NumericOp,
    _scalar: PhantomData<fn(&S)>,
}

impl<S> NumericAgg<S> {
    pub fn new(op: NumericOp) -> Self {
        NumericAgg { op, _scalar: PhantomData }
    }

    pub fn op(&self) -> NumericOp {
        self.op
    }
}

fn pick<S: Clone>(a: &Option<S>, b: &Option<S>, f: impl Fn(&S, &S) -> S) -> Option<S> {
    match (a, b) {
        (Some(x), Some(y)) => Some(f(x, y)),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

impl<S: Scalar> Aggregator for NumericAgg<S> {
    type Item = S;
    type Acc = NumericAcc<S>;
    type Output = AggValue<S>;

    fn empty(&self) -> NumericAcc<S> {
        NumericAcc { count: 0, sum: S::zero(), min: None, max: None, first: None, last: None }
    }

    fn add(&self, acc: &mut NumericAcc<S>, item: &S) {
        acc.count += 1;
        acc.sum = acc.sum.clone() + item.clone();
        if acc.min.as_ref().is_none_or(|m| item < m) {
            acc.min = Some(item.clone());
        }
        if acc.max.as_ref().is_none_or(|m| item > m) {
            acc.max = Some(item.clone());
        }
        if acc.first.is_none() {
            acc.first = Some(item.clone());
        }
        acc.last = Some(item.clone());
    }

    fn combine(&self, left: &NumericAcc<S>, right: &NumericAcc<S>) -> NumericAcc<S> {
        NumericAcc {
            count: left.count + right.count,
            sum: left.sum.clone() + right.sum.clone(),
            min: pick(&left.min, &right.min, |a, b| a.min(b).clone()),
            max: pick(&left.max, &right.max, |a, b| a.max(b).clone()),
            first: pick(&left.first, &right.first, |a, _| a.clone()),
            last: pick(&left.last, &right.last, |_, b| b.clone()),
        }
    }

    fn finalize(&self, acc: &NumericAcc<S>) -> AggValue<S> {
        let exact = |v: &Option<S>| v.clone().map_or(AggValue::Empty, AggValue::Exact);
        match self.op {
            NumericOp::Count => AggValue::Count(acc.count),
            NumericOp::Sum => AggValue::Exact(acc.sum.clone()),
            NumericOp::Min => exact(&acc.min),
            NumericOp::Max => exact(&acc.max),
            NumericOp::First => exact(&acc.first),
            NumericOp::Last => exact(&acc.last),
            NumericOp::Average if acc.count == 0 => AggValue::Empty,
            NumericOp::Average => {
                let count = S::from_int(i64::try_from(acc.count).unwrap_or(i64::MAX));
                AggValue::Float((acc.sum.clone() / count).to_f64())
            }
        }
    }
}
