//! Decimal digits of π with exact integer arithmetic.
//!
//! Machin's formula π = 16·atan(1/5) − 4·atan(1/239) evaluated in fixed point
//! with base-10⁹ limbs. Every operation is an exact integer division or
//! addition; the only error is truncation in the final limbs, which the guard
//! limbs absorb.

const BASE: u64 = 1_000_000_000;
const LIMB_DIGITS: usize = 9;
const GUARD_LIMBS: usize = 3;

/// Fixed-point number: `limbs[0]` is the integer part, the rest are
/// successive groups of nine decimals.
struct Fixed {
    limbs: Vec<u64>,
}

impl Fixed {
    fn zero(len: usize) -> Self {
        Self { limbs: vec![0; len] }
    }

    /// self /= d, starting at the first limb that may be non-zero.
    fn div_small(&mut self, d: u64, from: usize) {
        let mut rem = 0u64;
        for limb in &mut self.limbs[from..] {
            let cur = rem * BASE + *limb;
            *limb = cur / d;
            rem = cur % d;
        }
    }

    fn add_from(&mut self, other: &Fixed, from: usize) {
        let mut carry = 0u64;
        for i in (from..self.limbs.len()).rev() {
            let s = self.limbs[i] + other.limbs[i] + carry;
            self.limbs[i] = s % BASE;
            carry = s / BASE;
        }
        for i in (0..from).rev() {
            if carry == 0 {
                break;
            }
            let s = self.limbs[i] + carry;
            self.limbs[i] = s % BASE;
            carry = s / BASE;
        }
    }

    fn sub_from(&mut self, other: &Fixed, from: usize) {
        let mut borrow = 0u64;
        for i in (from..self.limbs.len()).rev() {
            let sub = other.limbs[i] + borrow;
            if self.limbs[i] >= sub {
                self.limbs[i] -= sub;
                borrow = 0;
            } else {
                self.limbs[i] = self.limbs[i] + BASE - sub;
                borrow = 1;
            }
        }
        for i in (0..from).rev() {
            if borrow == 0 {
                break;
            }
            if self.limbs[i] >= 1 {
                self.limbs[i] -= 1;
                borrow = 0;
            } else {
                self.limbs[i] = BASE - 1;
            }
        }
    }

    fn mul_small(&mut self, m: u64) {
        let mut carry = 0u64;
        for limb in self.limbs.iter_mut().rev() {
            let p = *limb * m + carry;
            *limb = p % BASE;
            carry = p / BASE;
        }
    }

    fn first_nonzero(&self, from: usize) -> Option<usize> {
        self.limbs[from..].iter().position(|&l| l != 0).map(|p| p + from)
    }
}

/// atan(1/x) to `len` limbs.
fn arctan_inv(x: u64, len: usize) -> Fixed {
    let mut sum = Fixed::zero(len);
    let mut power = Fixed::zero(len);
    power.limbs[0] = 1;
    power.div_small(x, 0);
    let x2 = x * x;
    let mut term = Fixed::zero(len);
    let mut k = 0u64;
    let mut lead = 0usize;
    while let Some(first) = power.first_nonzero(lead) {
        lead = first;
        term.limbs[lead..].copy_from_slice(&power.limbs[lead..]);
        term.div_small(2 * k + 1, lead);
        if k.is_multiple_of(2) {
            sum.add_from(&term, lead);
        } else {
            sum.sub_from(&term, lead);
        }
        // clear the copied region so stale limbs never leak into later terms
        term.limbs[lead..].iter_mut().for_each(|l| *l = 0);
        power.div_small(x2, lead);
        k += 1;
    }
    sum
}

/// The first `n` decimals of π after the decimal point.
pub fn pi_digits(n: usize) -> Vec<u8> {
    if n == 0 {
        return Vec::new();
    }
    let len = 1 + n.div_ceil(LIMB_DIGITS) + GUARD_LIMBS;
    let mut a = arctan_inv(5, len);
    a.mul_small(16);
    let mut b = arctan_inv(239, len);
    b.mul_small(4);
    a.sub_from(&b, 0);
    debug_assert_eq!(a.limbs[0], 3);
    let mut digits = Vec::with_capacity(n);
    'outer: for &limb in &a.limbs[1..] {
        let mut div = BASE / 10;
        while div > 0 {
            digits.push((limb / div % 10) as u8);
            if digits.len() == n {
                break 'outer;
            }
            div /= 10;
        }
    }
    digits
}
