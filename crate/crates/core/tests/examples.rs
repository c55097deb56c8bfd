mod alpha_sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/alpha_sweep.rs"));
}
mod dirac_collapse {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/dirac_collapse.rs"));
}
mod file_formats {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/file_formats.rs"));
}
mod mollification {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/mollification.rs"));
}
mod nonconvexity {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/nonconvexity.rs"));
}
mod solve_dirac {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/solve_dirac.rs"));
}
mod sparse_control {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sparse_control.rs"));
}
mod sub_supersolution {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sub_supersolution.rs"));
}
mod truncation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/truncation.rs"));
}

#[test]
fn example_alpha_sweep() {
    alpha_sweep::run_example().unwrap();
}

#[test]
fn example_dirac_collapse() {
    dirac_collapse::run_example().unwrap();
}

#[test]
fn example_file_formats() {
    file_formats::run_example().unwrap();
}

#[test]
fn example_mollification() {
    mollification::run_example().unwrap();
}

#[test]
fn example_nonconvexity() {
    nonconvexity::run_example().unwrap();
}

#[test]
fn example_solve_dirac() {
    solve_dirac::run_example().unwrap();
}

#[test]
fn example_sparse_control() {
    sparse_control::run_example().unwrap();
}

#[test]
fn example_sub_supersolution() {
    sub_supersolution::run_example().unwrap();
}

#[test]
fn example_truncation() {
    truncation::run_example().unwrap();
}
