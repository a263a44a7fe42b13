#pragma once

namespace tap {

// Resource guards for the exact solvers and branch enumeration.  Defaults suit
// the bundled test suites; the TAP_CAPS environment variable overrides them,
// e.g. TAP_CAPS="classes=30,branches=250000".
struct Caps {
    int max_classes = 22;         // constraint-class cap for exact solves
    long long branch_cap = 100000; // enumeration guard for branch families
};

// Parsed once on first use.  Malformed entries raise ErrorKind::Malformed.
const Caps& caps();

} // namespace tap
