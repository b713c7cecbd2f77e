use num_rational::Ratio;
use serde::ser::Serializer;

use crate::exact::fmt_ratio;
use crate::Int;

pub fn ratio<I: Int, S: Serializer>(q: &Ratio<I>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_ratio(q))
}

pub fn opt_ratio<I: Int, S: Serializer>(q: &Option<Ratio<I>>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&fmt_ratio(q)),
        None => s.serialize_none(),
    }
}
