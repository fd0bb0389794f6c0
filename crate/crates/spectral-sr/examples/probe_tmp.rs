use spectral_sr::constraints::{sr_pipeline, SrContext};
use spectral_sr::image::degrade;
use spectral_sr::metrics::sliced_hist_distance;
use spectral_sr::synth::gen_colored_noise;

fn main() {
    let gt = gen_colored_noise(256, 256, 1.7, 1234).unwrap();
    let lr = degrade(&gt, 4.0).unwrap();

    for rounds in [3usize, 6, 9] {
        let mut ctx = SrContext::new(&lr, 4.0, 99).unwrap();
        ctx.rounds = rounds;
        let out = sr_pipeline(&lr, &ctx).unwrap();
        let mut ctx2 = SrContext::new(&lr, 4.0, 99).unwrap();
        ctx2.rounds = rounds;
        ctx2.constraints.hist = None;
        let out2 = sr_pipeline(&lr, &ctx2).unwrap();
        let dw = sliced_hist_distance(&out, &lr, 7, 64).unwrap();
        let dwo = sliced_hist_distance(&out2, &lr, 7, 64).unwrap();
        println!("rounds={rounds}: with={dw:.4} without={dwo:.4} ratio={:.3}", dw / dwo);
    }

    // Damped transport: does eps < 1 settle the hist/rev tension?
    for eps in [0.5f64, 0.25] {
        let mut ctx = SrContext::new(&lr, 4.0, 99).unwrap();
        if let Some(h) = &mut ctx.constraints.hist { h.step_eps = eps; }
        let out = sr_pipeline(&lr, &ctx).unwrap();
        let dw = sliced_hist_distance(&out, &lr, 7, 64).unwrap();
        println!("eps={eps}: with={dw:.4}");
    }
}
