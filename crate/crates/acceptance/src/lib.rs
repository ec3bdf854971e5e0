//! Holds the `acceptance` test, which prints one PASS or FAIL line per
//! criterion and exits non-zero on any failure.
