use tiltwarp::synth::{make_sample, sample_angles, synth_tilt_mesh, TiltConfig};
use tiltwarp::{mesh_warp, psnr, ssim, Boundary, Image};

/// Smooth, natural-looking test scene: low-frequency gradients and blobs.
fn scene(w: usize, h: usize) -> Image {
    Image::from_fn(w, h, 3, |x, y, c| {
        let (u, v) = (x as f32 / w as f32, y as f32 / h as f32);
        let blob = (-((u - 0.4).powi(2) + (v - 0.55).powi(2)) * 18.0).exp();
        let base = 0.35 + 0.25 * (u * 5.0 + c as f32 * 0.8).sin() * (v * 4.0).cos();
        base + 0.3 * blob
    })
    .unwrap()
}

#[test]
fn round_trip_correction_every_interval() {
    let label = scene(512, 384);
    for seed in [1u64, 2] {
        for a in sample_angles(seed) {
            let s = make_sample(&label, a.degrees, 8, 6, TiltConfig::default()).unwrap();
            let corrected = mesh_warp(&s.input, &s.m_rig, &s.m_tilt, Boundary::default()).unwrap();
            let crop = |img: &Image| img.central_crop(0.6).unwrap();
            let (l, c, t) = (crop(&label), crop(&corrected), crop(&s.input));
            let (pc, sc) = (psnr(&c, &l).unwrap(), ssim(&c, &l).unwrap());
            let (pt, st) = (psnr(&t, &l).unwrap(), ssim(&t, &l).unwrap());
            assert!(pc >= 30.0 && sc >= 0.95, "{}: {pc} / {sc}", a.degrees);
            assert!(pc > pt && sc > st, "{}: corrected {pc}/{sc} vs tilted {pt}/{st}", a.degrees);
        }
    }
}

#[test]
fn tilt_meshes_valid_for_sampled_angles() {
    for seed in 0..200 {
        for a in sample_angles(seed) {
            let (_, m) = synth_tilt_mesh(a.degrees, 512, 384, 8, 6, TiltConfig::default()).unwrap();
            assert!(m.validate().is_ok());
        }
    }
}
