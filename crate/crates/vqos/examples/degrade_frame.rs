//! Push one synthetic frame through the network emulator at every
//! (rate, loss) condition and report the PSNR ladder.

use vqos::corpus::{gen_video, psnr, Motif};
use vqos::emulator::{degrade, ClassSets, RateConfig};

fn main() {
    let frames = gen_video(7, 1, 64, 64, Motif::MovingRectangle).unwrap();
    let frame = &frames[0];
    let classes = ClassSets::default();
    let cfg = RateConfig::default();

    let out_dir = std::env::temp_dir().join("vqos_degrade_example");
    std::fs::create_dir_all(&out_dir).unwrap();
    frame.write_pgm(&out_dir.join("original.pgm")).unwrap();

    println!("{:>10} {:>6} {:>10}", "rate_kbps", "loss", "psnr_db");
    for state in classes.conditions() {
        let degraded = degrade(frame, &state, &cfg, 42, None).unwrap();
        let quality = psnr(frame, &degraded).unwrap();
        println!("{:>10} {:>6} {:>10.2}", state.rate_kbps, state.loss_class, quality);
        let name = format!("degraded_r{}_l{}.pgm", state.rate_kbps, state.loss_class);
        degraded.write_pgm(&out_dir.join(name)).unwrap();
    }
    println!("frames written to {}", out_dir.display());
}
