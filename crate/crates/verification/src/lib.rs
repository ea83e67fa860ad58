//! Holds the `acceptance` test target. Run it with
//! `cargo test -p verification --test acceptance`.
