use polar_bd::blind::{run_blind_detection, Received};
use polar_bd::channel::{modulate_bpsk, snr_to_sigma, transmit_and_demodulate};
use polar_bd::decoder::{decode_with, DecodeOptions};
use polar_bd::sim::{run_experiment, ExperimentConfig, UeSent};
use polar_bd::{BlindDetectionConfig, Detection, IdMode, PolarCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

#[test]
fn high_snr_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for mode in [
        IdMode::AfterInfo,
        IdMode::MostReliable,
        IdMode::DecodedFirst,
    ] {
        let code = PolarCode::construct(256, 32, 16, mode, 0.0).unwrap();
        for _ in 0..20 {
            let payload = bits(&mut rng, 32);
            let id = bits(&mut rng, 16);
            let x = code.encode(&payload, &id).unwrap();
            let sigma = snr_to_sigma(6.0, code.rate()).unwrap();
            let llrs = transmit_and_demodulate(&modulate_bpsk(&x), sigma, &mut rng).unwrap();
            let r = decode_with(&code, &llrs, &DecodeOptions::list(4)).unwrap();
            assert_eq!((r.payload, r.decoded_id), (payload, id));
        }
    }
}

// Survivor selection is greedy, so a longer list is not guaranteed to find a
// better metric on every input. It should on nearly all of them.
#[test]
fn longer_lists_rarely_lose_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let code = PolarCode::construct(128, 24, 16, IdMode::AfterInfo, 0.0).unwrap();
    let sigma = snr_to_sigma(1.0, code.rate()).unwrap();
    let mut worse = 0;
    let total = 300;
    for _ in 0..total {
        let x = code
            .encode(&bits(&mut rng, 24), &bits(&mut rng, 16))
            .unwrap();
        let llrs = transmit_and_demodulate(&modulate_bpsk(&x), sigma, &mut rng).unwrap();
        let pms: Vec<f64> = [1, 2, 4, 8, 16]
            .iter()
            .map(|&l| {
                decode_with(&code, &llrs, &DecodeOptions::list(l))
                    .unwrap()
                    .pm_best
            })
            .collect();
        worse += pms.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    }
    assert!(worse * 100 < total * 4, "{worse} regressions");
}

#[test]
fn blind_detection_finds_the_carrier() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let short = PolarCode::construct(256, 57, 16, IdMode::AfterInfo, 0.0).unwrap();
    let long = PolarCode::construct(512, 57, 16, IdMode::AfterInfo, 0.0).unwrap();
    let ue = bits(&mut rng, 16);
    let carrier = 29;
    let mut sent = Vec::new();
    let llrs: Vec<Vec<f64>> = (0..44)
        .map(|i| {
            let code = if i < 22 { &short } else { &long };
            let payload = bits(&mut rng, 57);
            let id = if i == carrier {
                ue.clone()
            } else {
                let mut id = ue.clone();
                id[i % 16] ^= 1;
                id
            };
            let x = code.encode(&payload, &id).unwrap();
            sent.push(payload);
            let sigma = snr_to_sigma(5.0, short.rate()).unwrap();
            transmit_and_demodulate(&modulate_bpsk(&x), sigma, &mut rng).unwrap()
        })
        .collect();
    let received: Vec<Received<'_>> = llrs
        .iter()
        .enumerate()
        .map(|(i, l)| Received {
            code: if i < 22 { &short } else { &long },
            llrs: l,
        })
        .collect();
    let (det, stats) = run_blind_detection(&received, &BlindDetectionConfig::new(ue)).unwrap();
    assert_eq!(det.candidate_index(), Some(carrier));
    match det {
        Detection::Found { payload, .. } => assert_eq!(payload, sent[carrier]),
        Detection::NotFound => unreachable!(),
    }
    assert_eq!(stats.selected.len(), 5);
    assert_eq!(stats.selected[0], carrier);
    // The other candidates differ from the UE ID in a single bit. A list path
    // may still flip that bit and run to the end, but it pays for it.
    let carrier_pm = stats.phase_two[0].1.pm_best;
    for (_, r) in &stats.phase_two[1..] {
        assert!(r.stopped_early || r.pm_best > carrier_pm);
    }
}

#[test]
fn experiments_are_reproducible() {
    let cfg = ExperimentConfig {
        n1: 64,
        n2: 128,
        k: 16,
        c1: 8,
        c2: 3,
        ue_sent: UeSent::Alternate,
        ..Default::default()
    };
    let a = run_experiment(&cfg, &[1.0, 3.0], 30, 11, 2).unwrap();
    let b = run_experiment(&cfg, &[1.0, 3.0], 30, 11, 3).unwrap();
    let c = run_experiment(&cfg, &[1.0, 3.0], 30, 12, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    for (_, m) in &a {
        assert_eq!(m.trials, 30);
        assert!(m.mdr() <= 1.0 && m.bler() <= m.mdr());
    }
}
