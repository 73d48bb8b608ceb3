//! Least-squares fit of a smooth target through a small grid network.

use nalgebra::{DMatrix, DVector};

use dpsim::approximators::{build_grid_centers, gaussian_basis, RbfNetwork};

fn target(x: f64, y: f64) -> f64 {
    x.sin() * y.cos()
}

#[test]
fn grid_network_fits_smooth_function() {
    let centers = build_grid_centers(&[(-1.5, 1.5), (-1.5, 1.5)], 5, 100).unwrap();
    let net = RbfNetwork::uniform(centers, 0.5).unwrap();

    let train: Vec<(f64, f64)> = (0..21)
        .flat_map(|i| (0..21).map(move |j| (-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64)))
        .collect();
    let rows: Vec<f64> = train
        .iter()
        .flat_map(|&(x, y)| gaussian_basis(&net, &[x, y]).unwrap())
        .collect();
    let a = DMatrix::from_row_slice(train.len(), net.node_count(), &rows);
    let b = DVector::from_iterator(train.len(), train.iter().map(|&(x, y)| target(x, y)));
    let w = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();

    let mut worst = 0.0f64;
    for i in 0..17 {
        for j in 0..17 {
            let (x, y) = (-0.95 + 0.11875 * i as f64, -0.95 + 0.11875 * j as f64);
            let g = DVector::from_vec(gaussian_basis(&net, &[x, y]).unwrap());
            worst = worst.max((g.dot(&w) - target(x, y)).abs());
        }
    }
    assert!(worst < 0.05, "max error {worst}");
}
