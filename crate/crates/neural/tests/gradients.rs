use affectlag_neural::gradcheck::{check_gradients, FD_STEP};
use affectlag_neural::{
    mean_cross_entropy, softmax, Attention, BiLstm, Embedding, Gru, Init, Linear, Lstm, NodeId,
    Params, Tape,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-4;

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Random projection of the outputs so that every output coordinate matters.
fn project(tape: &mut Tape, outs: &[NodeId], proj: &[Vec<f64>]) -> NodeId {
    let terms: Vec<NodeId> = outs
        .iter()
        .zip(proj)
        .map(|(&o, p)| {
            let p = tape.input(p.clone());
            tape.dot(o, p)
        })
        .collect();
    tape.sum(&terms)
}

fn randomize_biases(params: &mut Params, rng: &mut ChaCha8Rng) {
    let ids: Vec<_> = params.ids().collect();
    for id in ids {
        if params.name(id).ends_with(".b") || params.name(id).contains(".b_") {
            for v in params.get_mut(id).data_mut() {
                *v = rng.random_range(-0.5..0.5);
            }
        }
    }
}

#[test]
fn lstm_gradients_match_finite_differences() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (din, hd, t) = (3, 4, 1 + (seed as usize % 5));
        let mut params = Params::new();
        let lstm = Lstm::new(&mut params, "lstm", din, hd, &mut rng);
        randomize_biases(&mut params, &mut rng);
        let xs: Vec<Vec<f64>> = (0..t).map(|_| rand_vec(&mut rng, din)).collect();
        let proj: Vec<Vec<f64>> = (0..t).map(|_| rand_vec(&mut rng, hd)).collect();
        let report = check_gradients(&mut params, FD_STEP, |tape, p| {
            let inputs: Vec<_> = xs.iter().map(|x| tape.input(x.clone())).collect();
            let hs = lstm.forward(tape, p, &inputs).unwrap();
            project(tape, &hs, &proj)
        });
        assert!(report.max_rel_err < TOL, "seed {seed}: {report:?}");
    }
}

#[test]
fn lstm_sum_of_last_state_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut params = Params::new();
    let lstm = Lstm::new(&mut params, "lstm", 2, 3, &mut rng);
    let xs: Vec<Vec<f64>> = (0..4).map(|_| rand_vec(&mut rng, 2)).collect();
    let report = check_gradients(&mut params, FD_STEP, |tape, p| {
        let inputs: Vec<_> = xs.iter().map(|x| tape.input(x.clone())).collect();
        let hs = lstm.forward(tape, p, &inputs).unwrap();
        let ones = tape.input(vec![1.0; 3]);
        tape.dot(*hs.last().unwrap(), ones)
    });
    assert!(report.max_rel_err < TOL, "{report:?}");
}

#[test]
fn bilstm_gradients_match_finite_differences() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let (din, hd, t) = (2, 3, 1 + (seed as usize % 5));
        let mut params = Params::new();
        let bi = BiLstm::new(&mut params, "bi", din, hd, &mut rng);
        randomize_biases(&mut params, &mut rng);
        let xs: Vec<Vec<f64>> = (0..t).map(|_| rand_vec(&mut rng, din)).collect();
        let proj: Vec<Vec<f64>> = (0..t).map(|_| rand_vec(&mut rng, 2 * hd)).collect();
        let report = check_gradients(&mut params, FD_STEP, |tape, p| {
            let inputs: Vec<_> = xs.iter().map(|x| tape.input(x.clone())).collect();
            let hs = bi.forward(tape, p, &inputs).unwrap();
            project(tape, &hs, &proj)
        });
        assert!(report.max_rel_err < TOL, "seed {seed}: {report:?}");
    }
}

#[test]
fn gru_gradients_match_finite_differences() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
        let (din, hd, t) = (3, 4, 1 + (seed as usize % 5));
        let mut params = Params::new();
        let gru = Gru::new(&mut params, "gru", din, hd, &mut rng);
        randomize_biases(&mut params, &mut rng);
        let xs: Vec<Vec<f64>> = (0..t).map(|_| rand_vec(&mut rng, din)).collect();
        let proj: Vec<Vec<f64>> = (0..t).map(|_| rand_vec(&mut rng, hd)).collect();
        let report = check_gradients(&mut params, FD_STEP, |tape, p| {
            let inputs: Vec<_> = xs.iter().map(|x| tape.input(x.clone())).collect();
            let hs = gru.forward(tape, p, &inputs).unwrap();
            project(tape, &hs, &proj)
        });
        assert!(report.max_rel_err < TOL, "seed {seed}: {report:?}");
    }
}

#[test]
fn attention_gradients_match_finite_differences() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let (sd, ad, t) = (4, 3, 1 + (seed as usize % 5));
        let mut params = Params::new();
        let att = Attention::new(&mut params, "att", sd, ad, &mut rng);
        // States are trainable here so the pooling path is checked too.
        let states = Linear::new(&mut params, "states", 2, sd, Init::Uniform(1.0), &mut rng);
        randomize_biases(&mut params, &mut rng);
        let xs: Vec<Vec<f64>> = (0..t).map(|_| rand_vec(&mut rng, 2)).collect();
        let proj = vec![rand_vec(&mut rng, sd), rand_vec(&mut rng, t)];
        let report = check_gradients(&mut params, FD_STEP, |tape, p| {
            let hs: Vec<_> = xs
                .iter()
                .map(|x| {
                    let x = tape.input(x.clone());
                    states.forward(tape, p, x)
                })
                .collect();
            let out = att.forward(tape, p, &hs).unwrap();
            project(tape, &[out.pooled, out.weights], &proj)
        });
        assert!(report.max_rel_err < TOL, "seed {seed}: {report:?}");
    }
}

#[test]
fn linear_embedding_softmax_ce_gradients() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
        let mut params = Params::new();
        let emb = Embedding::new(&mut params, "emb", 6, 4, &mut rng);
        let hidden = Linear::new(&mut params, "hidden", 4, 5, Init::Uniform(0.5), &mut rng);
        let head = Linear::new(&mut params, "head", 5, 3, Init::Uniform(0.5), &mut rng);
        randomize_biases(&mut params, &mut rng);
        let tokens: Vec<usize> = (0..3).map(|_| rng.random_range(0..6)).collect();
        let labels: Vec<usize> = (0..3).map(|_| rng.random_range(0..3)).collect();
        let report = check_gradients(&mut params, FD_STEP, |tape, p| {
            let probs: Vec<_> = tokens
                .iter()
                .map(|&tok| {
                    let x = emb.forward(tape, p, tok).unwrap();
                    let h = hidden.forward(tape, p, x);
                    let h = tape.relu(h);
                    let z = head.forward(tape, p, h);
                    tape.softmax(z)
                })
                .collect();
            mean_cross_entropy(tape, &probs, &labels).unwrap()
        });
        assert!(report.max_rel_err < TOL, "seed {seed}: {report:?}");
    }
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one_and_ignore_shifts(
        xs in prop::collection::vec(-50.0f64..50.0, 1..12),
        shift in -100.0f64..100.0,
    ) {
        let a = softmax(&xs);
        let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let b = softmax(&shifted);
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |best, (i, x)| if *x > v[best] { i } else { best });
        prop_assert_eq!(argmax(&a), argmax(&b));
    }

    #[test]
    fn attention_weights_are_a_distribution(seed in 0u64..1000, t in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Params::new();
        let att = Attention::new(&mut params, "att", 4, 3, &mut rng);
        let states: Vec<Vec<f64>> = (0..t).map(|_| rand_vec(&mut rng, 4)).collect();
        let (w, _) = att.run(&params, &states).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(w.iter().all(|&a| a > 0.0));
    }
}
