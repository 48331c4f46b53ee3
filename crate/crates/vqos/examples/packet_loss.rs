//! Packetization round-trip and empirical loss rates of the two loss
//! processes.

use vqos::emulator::{apply_loss, packetize, reassemble, LossModel};

fn main() {
    let stream: Vec<u8> = (0..=255u8).cycle().take(5_000).collect();
    let packets = packetize(&stream, 192, 0, None).unwrap();
    assert_eq!(reassemble(&packets), stream);
    println!("{} bytes -> {} packets -> reassembled byte-exact", stream.len(), packets.len());

    let many = packetize(&vec![0u8; 20_000], 1, 0, None).unwrap();
    for p in [0.05, 0.10, 0.25] {
        let model = LossModel::bernoulli(p).unwrap();
        let survivors = apply_loss(many.clone(), &model, 99);
        let rate = 1.0 - survivors.len() as f64 / many.len() as f64;
        println!("bernoulli p={p:<5} empirical loss rate {rate:.4}");
    }

    let bursty = LossModel::gilbert_elliott(0.05, 0.25, 1.0).unwrap();
    let survivors = apply_loss(many.clone(), &bursty, 7);
    println!(
        "gilbert-elliott stationary {:.4}, empirical {:.4}",
        bursty.stationary_loss_rate(),
        1.0 - survivors.len() as f64 / many.len() as f64
    );
}
