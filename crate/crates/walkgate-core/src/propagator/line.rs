//! The textbook coined walk on a line: a two-state coin steers left/right
//! shifts, the pedagogical limit of the general construction.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::unitarity_deviation;
use crate::C64;

/// Run `steps` applications of shift-after-coin on a line of
/// `2 steps + 1` sites starting from the center, and return the site
/// distribution with the coin traced out.
///
/// The shift sends `|x, 0> -> |x+1, 0>` and `|x, 1> -> |x-1, 1>`.
pub fn line_walk_demo(
    steps: usize,
    coin: &Array2<C64>,
    initial_coin: (C64, C64),
) -> Result<Vec<f64>> {
    if coin.nrows() != 2 || coin.ncols() != 2 {
        return Err(Error::DimensionMismatch(coin.nrows(), 2));
    }
    let dev = unitarity_deviation(coin);
    if dev > 1e-12 {
        return Err(Error::NotUnitary {
            deviation: dev,
            tol: 1e-12,
        });
    }
    let coin_norm = initial_coin.0.norm_sqr() + initial_coin.1.norm_sqr();
    if (coin_norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "initial coin state norm {coin_norm} deviates from 1"
        )));
    }

    let sites = 2 * steps + 1;
    let center = steps;
    // amplitudes[site][coin]
    let mut amp = vec![[C64::new(0.0, 0.0); 2]; sites];
    amp[center][0] = initial_coin.0;
    amp[center][1] = initial_coin.1;

    let mut next = vec![[C64::new(0.0, 0.0); 2]; sites];
    for _ in 0..steps {
        for cell in next.iter_mut() {
            *cell = [C64::new(0.0, 0.0); 2];
        }
        for x in 0..sites {
            let a0 = amp[x][0];
            let a1 = amp[x][1];
            if a0 == C64::new(0.0, 0.0) && a1 == C64::new(0.0, 0.0) {
                continue;
            }
            // Coin rotation first, then the conditional shift.
            let b0 = coin[[0, 0]] * a0 + coin[[0, 1]] * a1;
            let b1 = coin[[1, 0]] * a0 + coin[[1, 1]] * a1;
            if x + 1 < sites {
                next[x + 1][0] += b0;
            }
            if x > 0 {
                next[x - 1][1] += b1;
            }
        }
        std::mem::swap(&mut amp, &mut next);
    }

    Ok(amp
        .iter()
        .map(|cell| cell[0].norm_sqr() + cell[1].norm_sqr())
        .collect())
}

/// The Hadamard coin of the standard line-walk example.
pub fn hadamard_coin() -> Array2<C64> {
    let h = 1.0 / 2.0_f64.sqrt();
    let mut coin = Array2::<C64>::zeros((2, 2));
    coin[[0, 0]] = C64::new(h, 0.0);
    coin[[0, 1]] = C64::new(h, 0.0);
    coin[[1, 0]] = C64::new(h, 0.0);
    coin[[1, 1]] = C64::new(-h, 0.0);
    coin
}
