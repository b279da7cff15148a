//! Runs every reproduction criterion at its stated tolerance and budget and
//! prints one line per criterion.

use std::io::Write;

use gfc::repro::{run_all, ReproOptions};

#[test]
fn all_criteria() {
    let outcomes = run_all(&ReproOptions::default());
    // Written to the stdout handle rather than through `println!` so the
    // lines are shown even when the harness captures output.
    let mut out = std::io::stdout().lock();
    for o in &outcomes {
        writeln!(out, "{o}").unwrap();
    }
    drop(out);
    assert_eq!(outcomes.len(), 10);
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id.as_str()).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}
