//! Serialization helpers shared by reports and witnesses.

use num_bigint::BigUint;
use serde::Serializer;

/// Serializes an arbitrary-size integer as a decimal string.
pub(crate) fn decimal<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}
