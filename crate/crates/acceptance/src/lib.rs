//! Holds the `acceptance` test target, which checks the library end to end
//! against fixed numeric criteria. The package name sorts last in the
//! workspace so the other test targets report before it.
