use num_bigint::BigInt;
use num_traits::One;

/// Row `j` of Pascal's triangle, built by the additive recurrence.
pub fn pascal_row(j: u32) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for _ in 0..j {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(BigInt::one());
        for w in row.windows(2) {
            next.push(&w[0] + &w[1]);
        }
        next.push(BigInt::one());
        row = next;
    }
    row
}

pub fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `(-1)^(j-i) C(j, i)` for `i = 0..=j`: the weights of `Δ_y^j`.
pub fn difference_weights(j: u32) -> Vec<BigInt> {
    pascal_row(j)
        .into_iter()
        .enumerate()
        .map(|(i, c)| if (j as usize - i) % 2 == 0 { c } else { -c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn rows_match_known_values() {
        let row: Vec<i64> = pascal_row(6).iter().map(|c| i64::try_from(c).unwrap()).collect();
        assert_eq!(row, vec![1, 6, 15, 20, 15, 6, 1]);
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(5), BigInt::from(120));
    }

    #[test]
    fn alternating_sums_vanish() {
        for n in 1..12 {
            let total: BigInt = difference_weights(n).iter().sum();
            assert!(total.is_zero(), "n = {n}");
        }
        assert_eq!(difference_weights(0), vec![BigInt::one()]);
    }
}
