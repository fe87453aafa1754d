//! Benchmark fixtures.

use rmrs_core::{parse_model, parse_rm, ModelDocument, RegisterProgram};

/// Unregulated producer/consumer system with a wide branching factor.
pub const BRANCHING: &str = "\
elements: A B C
init: {A, A, B}
rules:
  mu1: {A} -> {A, B}
  mu2: {B} -> {C}
  mu3: {C} -> {A}
  mu4: {A, B} -> {C}
  mu5: {C, C} -> {}
regulation: none
";

/// The same rules under a concurrent-free priority.
pub const PRIORITY: &str = "\
elements: A B C
init: {A, A, B}
rules:
  mu1: {A} -> {A, B}
  mu2: {B} -> {C}
  mu3: {C} -> {A}
  mu4: {A, B} -> {C}
  mu5: {C, C} -> {}
regulation: concurrent-free
  mu1 < mu4
  mu3 < mu5
";

pub const REGULAR: &str = "\
elements: A B C
init: {A, A, B}
rules:
  mu1: {A} -> {A, B}
  mu2: {B} -> {C}
  mu3: {C} -> {A}
regulation: regular
  zeta = (mu1 . mu2 | mu3)* . (mu1 . (mu2 | mu3) . mu3*)^w | eps^w
";

pub const DOUBLING: &str = "\
l1: if c1 = 0 goto l4 else dec goto l2
l2: inc c2 goto l3
l3: inc c2 goto l1
l4: halt
";

pub fn model(text: &str) -> ModelDocument {
    parse_model(text).expect("fixture parses")
}

pub fn doubling() -> RegisterProgram {
    parse_rm(DOUBLING).expect("fixture parses")
}
