use proptest::prelude::*;
use tiltwarp::geometry::{is_valid_quad, pixel_center, rotate_about};
use tiltwarp::mesh::cell_of_pixel;
use tiltwarp::{
    analytic_rotation_flow, backward_warp, dlt_homography, endpoint_error, grid_homographies, mesh_to_flow,
    mesh_warp, mirror_flow, mirror_lr, upsample_flow, Boundary, Error, FlowField, Image, Mesh, Point2,
};

fn pattern(w: usize, h: usize, c: usize, seed: u32) -> Image {
    let s = seed as f32 * 0.37;
    Image::from_fn(w, h, c, |x, y, ch| {
        0.5 + 0.45 * ((x as f32 * 0.11 + s + ch as f32).sin() * (y as f32 * 0.07 - s).cos())
    })
    .unwrap()
}

fn quad() -> impl Strategy<Value = [Point2<f64>; 4]> {
    // jittered axis-aligned box: stays convex and positively oriented
    (
        -500.0..500.0f64,
        -500.0..500.0f64,
        20.0..300.0f64,
        20.0..300.0f64,
        proptest::collection::vec(-0.2..0.2f64, 8),
    )
        .prop_map(|(x, y, w, h, j)| {
            [
                Point2::new(x + j[0] * w, y + j[1] * h),
                Point2::new(x + w + j[2] * w, y + j[3] * h),
                Point2::new(x + w + j[4] * w, y + h + j[5] * h),
                Point2::new(x + j[6] * w, y + h + j[7] * h),
            ]
        })
}

fn jittered_mesh(w: usize, h: usize, amp: f64, seed: &[f64]) -> Mesh<f64> {
    let rig = Mesh::rigid(w, h, 8, 6).unwrap();
    let mut k = 0;
    rig.map_vertices(|p| {
        let q = Point2::new(p.x + amp * seed[k % seed.len()], p.y + amp * seed[(k + 1) % seed.len()]);
        k += 2;
        q
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dlt_reprojects_its_points(src in quad(), dst in quad()) {
        prop_assume!(is_valid_quad(&src) && is_valid_quad(&dst));
        let h = dlt_homography(&src, &dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            prop_assert!(h.apply(*s).distance(*d) < 1e-6);
        }
    }

    #[test]
    fn dlt_rejects_three_collinear(src in quad(), t in 0.1..0.9f64, k in 0usize..4) {
        let mut bad = src;
        let (a, b) = (bad[(k + 1) % 4], bad[(k + 3) % 4]);
        bad[k] = Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
        prop_assert!(matches!(
            dlt_homography(&bad, &src),
            Err(Error::DegenerateConfiguration(_))
        ));
        prop_assert!(dlt_homography(&src, &bad).is_err());
    }

    #[test]
    fn symmetry_equivariance_bit_exact(
        seed in 0u32..1000,
        channels in prop_oneof![Just(1usize), Just(3usize)],
        flow in proptest::collection::vec(-6.0f32..6.0, 2 * 16 * 16),
        clamp in any::<bool>(),
    ) {
        let img = pattern(16, 16, channels, seed);
        let f = FlowField::new(16, 16, flow[..256].to_vec(), flow[256..].to_vec()).unwrap();
        let b = if clamp { Boundary::ClampToEdge } else { Boundary::Constant(0.25) };
        let lhs = mirror_lr(&backward_warp(&img, &f, b).unwrap());
        let rhs = backward_warp(&mirror_lr(&img), &mirror_flow(&f), b).unwrap();
        let (l, r) = (lhs.unit_data(), rhs.unit_data());
        prop_assert!(l.iter().zip(r.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn path_equivalence(jitter in proptest::collection::vec(-1.0..1.0f64, 126)) {
        let m = jittered_mesh(128, 96, 3.0, &jitter);
        prop_assume!(m.validate().is_ok());
        let rig = Mesh::rigid(128, 96, 8, 6).unwrap();
        let img = pattern(128, 96, 3, 5);
        let direct = mesh_warp(&img, &rig, &m, Boundary::default()).unwrap();
        let flow: FlowField<f32> = mesh_to_flow(&rig, &m).unwrap();
        let via = backward_warp(&img, &flow, Boundary::default()).unwrap();
        prop_assert_eq!(direct.unit_data(), via.unit_data());
    }

    #[test]
    fn constant_flow_upsamples_to_scaled_constant(
        u in -20.0f32..20.0, v in -20.0f32..20.0, k in 1usize..5,
    ) {
        let f = FlowField::constant(16, 12, u, v).unwrap();
        let up = upsample_flow(&f, 16 * k, 12 * k).unwrap();
        let (gu, gv) = (u * k as f32, v * k as f32);
        prop_assert!(up.u().iter().all(|&a| a == gu) && up.v().iter().all(|&b| b == gv));
    }

    #[test]
    fn cell_partition_total(w in 8usize..300, h in 6usize..300, u in 1usize..9, v in 1usize..7) {
        prop_assume!(w > u && h > v);
        let mut counts = vec![0usize; u * v];
        for y in 0..h {
            for x in 0..w {
                let (cu, cv) = cell_of_pixel(x, y, w, h, u, v);
                prop_assert!(cu < u && cv < v);
                prop_assert_eq!((cu, cv), ((x * u / w).min(u - 1), (y * v / h).min(v - 1)));
                counts[cv * u + cu] += 1;
            }
        }
        prop_assert_eq!(counts.iter().sum::<usize>(), w * h);
    }
}

#[test]
fn identity_chain_exact() {
    let rig = Mesh::<f64>::rigid(512, 384, 8, 6).unwrap();
    let grid = grid_homographies(&rig, &rig).unwrap();
    assert!(grid.iter().all(|h| *h == tiltwarp::Homography::identity()));
    let flow: FlowField<f32> = mesh_to_flow(&rig, &rig).unwrap();
    assert!(flow.u().iter().chain(flow.v()).all(|&t| t == 0.0));
    let img = pattern(512, 384, 3, 1);
    let out = backward_warp(&img, &flow, Boundary::default()).unwrap();
    assert_eq!(out.unit_data(), img.unit_data());
    assert_eq!(mesh_warp(&img, &rig, &rig, Boundary::default()).unwrap().unit_data(), img.unit_data());
}

#[test]
fn rotation_collapse() {
    let c = pixel_center(512, 384);
    for theta in [3.1, -3.1, 5.4, -5.4, 9.5, -9.5] {
        let rig = Mesh::<f64>::rigid(512, 384, 8, 6).unwrap();
        let pre = rig.rotated_about(theta, c);
        let grid = grid_homographies(&rig, &pre).unwrap();
        let first = *grid.get(0, 0);
        assert!(grid.iter().all(|h| h.max_abs_diff(&first) < 1e-8), "{theta}");
        // the shared homography is the rotation itself
        let (rx, ry) = rotate_about((10.0, 20.0), c, theta);
        let p = first.apply(Point2::new(10.0, 20.0));
        assert!((p.x - rx).abs() < 1e-8 && (p.y - ry).abs() < 1e-8);
        let flow: FlowField<f32> = mesh_to_flow(&rig, &pre).unwrap();
        let exact = analytic_rotation_flow::<f32>(theta, 512, 384).unwrap();
        let (_, max) = endpoint_error(&flow, &exact).unwrap();
        assert!(max < 1e-4, "{theta}: {max}");
    }
}

#[test]
fn bit_identical_across_thread_counts() {
    let rig = Mesh::<f64>::rigid(256, 192, 8, 6).unwrap();
    let pre = rig.rotated_about(4.2, pixel_center(256, 192)).translated(1.3, -0.7);
    let img = pattern(256, 192, 3, 9);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let flow: FlowField<f32> = mesh_to_flow(&rig, &pre).unwrap();
            let up = upsample_flow(&flow, 512, 384).unwrap();
            let big = tiltwarp::resize_bilinear(&img, 512, 384).unwrap();
            (flow, backward_warp(&big, &up, Boundary::ClampToEdge).unwrap())
        })
    };
    let (f1, o1) = run(1);
    let (f4, o4) = run(4);
    assert_eq!(f1, f4);
    assert_eq!(o1.unit_data(), o4.unit_data());
}
