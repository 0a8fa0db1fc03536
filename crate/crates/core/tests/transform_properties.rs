//! Property tests for the transform layer: round trips, the convolution
//! theorem, tight-frame reconstruction and adjoint pairings on randomly
//! shaped inputs.

use deframe_core::{
    conv_circular, fft2, framelet_analyze, framelet_synthesize, ifft2, psf_to_spectral, Image,
    PsfKernel,
};
use proptest::prelude::*;

fn arb_image(max_side: usize) -> impl Strategy<Value = Image> {
    (2..=max_side, 2..=max_side).prop_flat_map(|(h, w)| {
        proptest::collection::vec(-1.0..1.0f64, h * w)
            .prop_map(move |data| Image::new(h, w, data).unwrap())
    })
}

fn arb_kernel(max_side: usize) -> impl Strategy<Value = PsfKernel> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(r, s)| {
        proptest::collection::vec(-1.0..1.0f64, r * s)
            .prop_map(move |w| PsfKernel::new(r, s, w).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_roundtrip_is_identity(img in arb_image(24)) {
        let back = ifft2(&fft2(&img).unwrap()).unwrap();
        prop_assert!(img.max_abs_diff(&back) <= 1e-12);
    }

    #[test]
    fn parseval_energy_scales_with_grid(img in arb_image(24)) {
        let spec = fft2(&img).unwrap();
        let lhs: f64 = spec.data().iter().map(|c| c.norm_sqr()).sum();
        let rhs = (img.height() * img.width()) as f64
            * img.data().iter().map(|v| v * v).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn convolution_theorem_matches_spatial_sum(
        img in arb_image(16),
        kernel in arb_kernel(5),
    ) {
        prop_assume!(kernel.rows() <= img.height() && kernel.cols() <= img.width());
        let spectral = conv_circular(&img, &kernel).unwrap();
        let (h, w) = (img.height() as isize, img.width() as isize);
        let (cr, cc) = ((kernel.rows() / 2) as isize, (kernel.cols() / 2) as isize);
        let naive = Image::from_fn(img.height(), img.width(), |i, j| {
            let mut acc = 0.0;
            for u in 0..kernel.rows() {
                for v in 0..kernel.cols() {
                    let si = (i as isize - (u as isize - cr)).rem_euclid(h) as usize;
                    let sj = (j as isize - (v as isize - cc)).rem_euclid(w) as usize;
                    acc += kernel.get(u, v) * img.get(si, sj);
                }
            }
            acc
        });
        prop_assert!(spectral.max_abs_diff(&naive) <= 1e-10);
    }

    #[test]
    fn framelet_reconstruction_is_identity(img in arb_image(24)) {
        let back = framelet_synthesize(&framelet_analyze(&img));
        prop_assert!(img.max_abs_diff(&back) <= 1e-10);
    }

    #[test]
    fn spectral_adjoint_pairing(img in arb_image(12), kernel in arb_kernel(3)) {
        prop_assume!(kernel.rows() <= img.height() && kernel.cols() <= img.width());
        let op = psf_to_spectral(&kernel, img.height(), img.width()).unwrap();
        let other = Image::from_fn(img.height(), img.width(), |i, j| {
            ((i * 31 + j * 17) % 13) as f64 / 13.0 - 0.4
        });
        let lhs = op.apply(&img).unwrap().dot(&other);
        let rhs = img.dot(&op.apply_adjoint(&other).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
    }
}
