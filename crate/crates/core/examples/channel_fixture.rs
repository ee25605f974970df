//! Writes one channel realization to text and reads it back.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mfris_est::channel::{generate, ChannelSet};
use mfris_est::SystemConfig;

fn main() -> mfris_est::Result<()> {
    let cfg = SystemConfig::default();
    let ch = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(42));
    let mut buf = Vec::new();
    ch.write_text(&mut buf)?;
    let back = ChannelSet::read_text(buf.as_slice())?;
    println!("{} bytes, round trip exact: {}", buf.len(), back == ch);
    for m in 0..ch.ris_bs.antennas() {
        println!("antenna {m}: phase offset {:+.4} rad", ch.ris_bs.rotation(m).arg());
    }
    print!("{}", String::from_utf8_lossy(&buf[..buf.len().min(400)]));
    Ok(())
}
