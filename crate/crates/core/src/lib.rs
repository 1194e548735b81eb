//! Three-tier content caching for a vehicle platoon: platoon caches, a
//! vehicular fog cache (VFC) of nearby cars, and the cloud behind a
//! roadside unit. Needs only `alloc`.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod channel;
pub mod config;
pub mod decision;
pub mod delay;
pub mod experiment;
pub mod policy;
pub mod rng;
pub mod scenario;

use alloc::string::String;

pub(crate) fn hex(bytes: &[u8]) -> String {
    use core::fmt::Write;
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}
