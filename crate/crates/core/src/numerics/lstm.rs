//! LSTM and bidirectional-LSTM built from tape primitives.
//!
//! States are row vectors. A direction's weights pack the four gates
//! side by side in `[input, forget, cell, output]` order, so `wx` is
//! `in_dim x 4h`, `wh` is `h x 4h` and `b` is `1 x 4h`.

use super::{NumericsError, Tape, Tensor, ValueId};

/// Tape handles for one direction's weights.
#[derive(Debug, Clone, Copy)]
pub struct DirectionWeights {
    pub wx: ValueId,
    pub wh: ValueId,
    pub b: ValueId,
}

/// One LSTM step: consumes `(x, h, c)` and returns `(h', c')`.
pub fn lstm_step(
    tape: &mut Tape,
    x: ValueId,
    h: ValueId,
    c: ValueId,
    weights: &DirectionWeights,
) -> Result<(ValueId, ValueId), NumericsError> {
    let hidden = tape.value(weights.wh).rows();
    let xz = tape.matmul(x, weights.wx)?;
    let hz = tape.matmul(h, weights.wh)?;
    let sum = tape.add(xz, hz)?;
    let z = tape.add(sum, weights.b)?;

    let iz = tape.slice_cols(z, 0, hidden)?;
    let fz = tape.slice_cols(z, hidden, 2 * hidden)?;
    let gz = tape.slice_cols(z, 2 * hidden, 3 * hidden)?;
    let oz = tape.slice_cols(z, 3 * hidden, 4 * hidden)?;
    let i = tape.sigmoid(iz);
    let f = tape.sigmoid(fz);
    let g = tape.tanh(gz);
    let o = tape.sigmoid(oz);

    let keep = tape.mul(f, c)?;
    let write = tape.mul(i, g)?;
    let c_next = tape.add(keep, write)?;
    let c_act = tape.tanh(c_next);
    let h_next = tape.mul(o, c_act)?;
    Ok((h_next, c_next))
}

/// Runs a forward and a backward LSTM over `xs` and concatenates the two
/// hidden states at each position, yielding vectors of width `2h`.
pub fn bilstm(
    tape: &mut Tape,
    xs: &[ValueId],
    forward: &DirectionWeights,
    backward: &DirectionWeights,
) -> Result<Vec<ValueId>, NumericsError> {
    assert!(!xs.is_empty(), "bilstm needs a non-empty sequence");
    let hidden = tape.value(forward.wh).rows();

    let mut h = tape.constant(Tensor::zeros(1, hidden));
    let mut c = tape.constant(Tensor::zeros(1, hidden));
    let mut fwd_states = Vec::with_capacity(xs.len());
    for &x in xs {
        let (h2, c2) = lstm_step(tape, x, h, c, forward)?;
        fwd_states.push(h2);
        h = h2;
        c = c2;
    }

    let mut h = tape.constant(Tensor::zeros(1, hidden));
    let mut c = tape.constant(Tensor::zeros(1, hidden));
    let mut bwd_states = vec![h; xs.len()];
    for (t, &x) in xs.iter().enumerate().rev() {
        let (h2, c2) = lstm_step(tape, x, h, c, backward)?;
        bwd_states[t] = h2;
        h = h2;
        c = c2;
    }

    fwd_states
        .into_iter()
        .zip(bwd_states)
        .map(|(f, b)| tape.concat_cols(f, b))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weights(tape: &mut Tape, prefix: &str, in_dim: usize, hidden: usize, value: impl Fn(usize) -> f64) -> DirectionWeights {
        let wx = Tensor::new(in_dim, 4 * hidden, (0..in_dim * 4 * hidden).map(&value).collect());
        let wh = Tensor::new(hidden, 4 * hidden, (0..hidden * 4 * hidden).map(|i| value(i + 1000)).collect());
        let b = Tensor::new(1, 4 * hidden, (0..4 * hidden).map(|i| value(i + 2000)).collect());
        DirectionWeights {
            wx: tape.param(&format!("{prefix}.wx"), wx),
            wh: tape.param(&format!("{prefix}.wh"), wh),
            b: tape.param(&format!("{prefix}.b"), b),
        }
    }

    #[test]
    fn zero_weights_give_zero_hidden_states() {
        let mut tape = Tape::new();
        let w = weights(&mut tape, "z", 3, 2, |_| 0.0);
        let x = tape.constant(Tensor::zeros(1, 3));
        let h = tape.constant(Tensor::zeros(1, 2));
        let c = tape.constant(Tensor::zeros(1, 2));
        let (h2, c2) = lstm_step(&mut tape, x, h, c, &w).unwrap();
        assert_eq!(tape.value(h2).values(), &[0.0, 0.0]);
        assert_eq!(tape.value(c2).values(), &[0.0, 0.0]);
    }

    /// Scalar re-implementation of the gate equations, loops and f64 only.
    fn scalar_lstm(
        xs: &[Vec<f64>],
        wx: &Tensor,
        wh: &Tensor,
        b: &Tensor,
        hidden: usize,
    ) -> Vec<Vec<f64>> {
        let sigmoid = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut h = vec![0.0; hidden];
        let mut c = vec![0.0; hidden];
        let mut out = Vec::new();
        for x in xs {
            let mut z = vec![0.0; 4 * hidden];
            for (j, zj) in z.iter_mut().enumerate() {
                let mut acc = b.get(0, j);
                for (k, xv) in x.iter().enumerate() {
                    acc += xv * wx.get(k, j);
                }
                for (k, hv) in h.iter().enumerate() {
                    acc += hv * wh.get(k, j);
                }
                *zj = acc;
            }
            let mut h2 = vec![0.0; hidden];
            let mut c2 = vec![0.0; hidden];
            for j in 0..hidden {
                let i_g = sigmoid(z[j]);
                let f_g = sigmoid(z[hidden + j]);
                let g_g = z[2 * hidden + j].tanh();
                let o_g = sigmoid(z[3 * hidden + j]);
                c2[j] = f_g * c[j] + i_g * g_g;
                h2[j] = o_g * c2[j].tanh();
            }
            h = h2.clone();
            c = c2;
            out.push(h2);
        }
        out
    }

    #[test]
    fn gates_match_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let hidden = 4;
        let in_dim = 3;
        let vals: Vec<f64> = (0..4000).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let mut tape = Tape::new();
        let w = weights(&mut tape, "o", in_dim, hidden, |i| vals[i % vals.len()]);
        let xs_raw: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..in_dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();

        let mut h = tape.constant(Tensor::zeros(1, hidden));
        let mut c = tape.constant(Tensor::zeros(1, hidden));
        let mut taped = Vec::new();
        for x in &xs_raw {
            let xi = tape.constant(Tensor::new(1, in_dim, x.clone()));
            let (h2, c2) = lstm_step(&mut tape, xi, h, c, &w).unwrap();
            taped.push(h2);
            h = h2;
            c = c2;
        }

        let wx = tape.value(w.wx).clone();
        let wh = tape.value(w.wh).clone();
        let b = tape.value(w.b).clone();
        let expected = scalar_lstm(&xs_raw, &wx, &wh, &b, hidden);
        for (got, want) in taped.iter().zip(&expected) {
            for (g, e) in tape.value(*got).values().iter().zip(want) {
                assert!((g - e).abs() < 1e-12, "taped {g} vs scalar {e}");
            }
        }
    }

    #[test]
    fn length_one_sequence_uses_both_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut vals = (0..4000).map(|_| rng.gen_range(-0.5..0.5)).collect::<Vec<_>>();
        let mut tape = Tape::new();
        let fwd = weights(&mut tape, "f", 3, 2, |i| vals[i % 4000]);
        vals.rotate_left(7);
        let bwd = weights(&mut tape, "b", 3, 2, |i| vals[i % 4000]);
        let x = tape.constant(Tensor::new(1, 3, vec![0.3, -0.1, 0.9]));
        let out = bilstm(&mut tape, &[x], &fwd, &bwd).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(tape.value(out[0]).shape(), (1, 4));

        // each half must equal a single step of its direction from rest
        let h0 = tape.constant(Tensor::zeros(1, 2));
        let c0 = tape.constant(Tensor::zeros(1, 2));
        let (fh, _) = lstm_step(&mut tape, x, h0, c0, &fwd).unwrap();
        let (bh, _) = lstm_step(&mut tape, x, h0, c0, &bwd).unwrap();
        let full = tape.value(out[0]).values().to_vec();
        assert_eq!(&full[..2], tape.value(fh).values());
        assert_eq!(&full[2..], tape.value(bh).values());
    }

    #[test]
    fn information_flows_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let vals: Vec<f64> = (0..4000).map(|_| rng.gen_range(-0.6..0.6)).collect();
        let n = 5;

        let run = |bump_first: f64, bump_last: f64| {
            let mut tape = Tape::new();
            let fwd = weights(&mut tape, "f", 2, 3, |i| vals[i % 4000]);
            let bwd = weights(&mut tape, "b", 2, 3, |i| vals[(i + 13) % 4000]);
            let xs: Vec<ValueId> = (0..n)
                .map(|t| {
                    let mut v = vec![0.2 * t as f64, -0.3];
                    if t == 0 {
                        v[0] += bump_first;
                    }
                    if t == n - 1 {
                        v[1] += bump_last;
                    }
                    tape.constant(Tensor::new(1, 2, v))
                })
                .collect();
            let out = bilstm(&mut tape, &xs, &fwd, &bwd).unwrap();
            (
                tape.value(out[0]).values().to_vec(),
                tape.value(out[n - 1]).values().to_vec(),
            )
        };

        let (first_base, last_base) = run(0.0, 0.0);
        let (_, last_bumped) = run(0.7, 0.0);
        let (first_bumped, _) = run(0.0, 0.7);
        assert_ne!(last_base, last_bumped, "forward direction must carry x[0] to the end");
        assert_ne!(first_base, first_bumped, "backward direction must carry x[n-1] to the front");
    }
}
