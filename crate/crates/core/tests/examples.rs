#![allow(dead_code)]

mod evaluate_functions {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/evaluate_functions.rs"));
}

mod frequency_profile {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/frequency_profile.rs"));
}

mod doubling_index {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/doubling_index.rs"));
}

mod nodal_volume {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/nodal_volume.rs"));
}

mod signed_balls {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/signed_balls.rs"));
}

mod poisson_extension {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/poisson_extension.rs"));
}

mod stable_window {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/stable_window.rs"));
}

mod tunnel_bundle {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tunnel_bundle.rs"));
}

mod ball_collection {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ball_collection.rs"));
}

mod index_distribution {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/index_distribution.rs"));
}

mod nodal_figures {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/nodal_figures.rs"));
}


#[test]
fn example_evaluate_functions() {
    evaluate_functions::run_example();
}

#[test]
fn example_frequency_profile() {
    frequency_profile::run_example();
}

#[test]
fn example_doubling_index() {
    doubling_index::run_example();
}

#[test]
fn example_nodal_volume() {
    nodal_volume::run_example();
}

#[test]
fn example_signed_balls() {
    signed_balls::run_example();
}

#[test]
fn example_poisson_extension() {
    poisson_extension::run_example();
}

#[test]
fn example_stable_window() {
    stable_window::run_example();
}

#[test]
fn example_tunnel_bundle() {
    tunnel_bundle::run_example();
}

#[test]
fn example_ball_collection() {
    ball_collection::run_example();
}

#[test]
fn example_index_distribution() {
    index_distribution::run_example();
}

#[test]
fn example_nodal_figures() {
    nodal_figures::run_example();
}
