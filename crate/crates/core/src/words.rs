//! Cyclic orientation words and the rewrite calculus of their sequences.
//!
//! A word lists the robots' orientations in cycle order. Adjacent `+-`
//! pairs (cyclically) are the pairs that meet during a round; one round
//! flips every such pair to `-+`. A *sequence* is a maximal chain of pairs
//! starting at positions `j, j + 2, j + 4, ...`, i.e. a run `+-+-...+-`.
//! Sequences may wrap around the end of the word.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Orientation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientationWord {
    /// `true` is `+`.
    letters: Vec<bool>,
}

impl OrientationWord {
    pub fn new(letters: Vec<bool>) -> Result<Self> {
        if letters.len() < 2 {
            return Err(Error::InvalidWord(format!("length {} < 2", letters.len())));
        }
        Ok(Self { letters })
    }

    /// Word of length `n` whose letter `i` is `+` when bit `i` of `mask` is set.
    pub fn from_mask(mask: u64, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn from_orientations(o: &[Orientation]) -> Result<Self> {
        Self::new(o.iter().map(|x| x.is_forward()).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..n).map(|_| rng.random::<bool>()).collect())
    }

    pub fn to_orientations(&self) -> Vec<Orientation> {
        self.letters
            .iter()
            .map(|&p| if p { Orientation::Forward } else { Orientation::Backward })
            .collect()
    }

    pub fn letters(&self) -> &[bool] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn n_plus(&self) -> usize {
        self.letters.iter().filter(|&&p| p).count()
    }

    pub fn n_minus(&self) -> usize {
        self.len() - self.n_plus()
    }

    pub fn n_bal(&self) -> usize {
        self.n_plus().min(self.n_minus())
    }

    pub fn is_balanced(&self) -> bool {
        self.n_plus() == self.n_minus()
    }

    fn at(&self, i: usize) -> bool {
        self.letters[i % self.len()]
    }

    /// Positions `i` with `w[i] = +` and `w[i + 1] = -` (cyclic), ascending.
    /// Such pairs never overlap.
    pub fn pair_starts(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.at(i) && !self.at(i + 1))
            .collect()
    }

    /// One round: every meeting pair `+-` becomes `-+`.
    pub fn step(&self) -> Result<Self> {
        if self.n_bal() == 0 {
            return Err(Error::NoBalancedPair);
        }
        let n = self.len();
        let mut next = self.letters.clone();
        for i in self.pair_starts() {
            next[i] = false;
            next[(i + 1) % n] = true;
        }
        Ok(Self { letters: next })
    }

    /// The meeting pairs when there are exactly `n_bal` of them.
    pub fn interlacing_witness(&self) -> Result<Option<Vec<usize>>> {
        let n_bal = self.n_bal();
        if n_bal == 0 {
            return Err(Error::NoBalancedPair);
        }
        let starts = self.pair_starts();
        Ok((starts.len() == n_bal).then_some(starts))
    }

    pub fn is_interlaced(&self) -> Result<bool> {
        Ok(self.interlacing_witness()?.is_some())
    }
}

impl fmt::Display for OrientationWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &p in &self.letters {
            f.write_str(if p { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for OrientationWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(true),
                '-' | '\u{2212}' => Ok(false),
                other => Err(Error::InvalidWord(format!("unexpected letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

/// Cyclic run `[start, start + len)` of alternating letters starting with `+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sequence {
    pub start: usize,
    pub len: usize,
}

impl Sequence {
    fn normalized(self, n: usize) -> Self {
        if self.len == n {
            Sequence { start: 0, len: n }
        } else {
            self
        }
    }

    fn contains(&self, other: &Sequence, n: usize) -> bool {
        self.len == n || ((other.start + n - self.start) % n) + other.len <= self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub sequences: Vec<Sequence>,
    /// Positions not covered by any sequence.
    pub letters: Vec<usize>,
}

pub fn decompose(w: &OrientationWord) -> Decomposition {
    let n = w.len();
    let starts = w.pair_starts();
    let mut is_start = vec![false; n];
    for &s in &starts {
        is_start[s] = true;
    }
    let sequences = if starts.is_empty() {
        Vec::new()
    } else if 2 * starts.len() == n {
        vec![Sequence { start: 0, len: n }]
    } else {
        starts
            .iter()
            .filter(|&&j| !is_start[(j + n - 2) % n])
            .map(|&j| {
                let mut len = 0;
                let mut k = j;
                while is_start[k] {
                    len += 2;
                    k = (k + 2) % n;
                }
                Sequence { start: j, len }
            })
            .collect()
    };
    let mut covered = vec![false; n];
    for s in &sequences {
        for k in 0..s.len {
            covered[(s.start + k) % n] = true;
        }
    }
    let letters = (0..n).filter(|&i| !covered[i]).collect();
    Decomposition { sequences, letters }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    MovePlus,
    MoveMinus,
    Expand,
    Reduce,
    Merge,
    Disappear,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::MovePlus => "Move+",
            Rule::MoveMinus => "Move-",
            Rule::Expand => "Expand",
            Rule::Reduce => "Reduce",
            Rule::Merge => "Merge",
            Rule::Disappear => "Disappear",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How one sequence of `w` evolves into `step(w)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub source: Sequence,
    /// Rule selected by the letters around the sequence.
    pub pattern: Rule,
    /// Where the pattern alone moves the sequence; `None` when it disappears.
    pub image: Option<Sequence>,
    /// Sequence of the next word that contains the image.
    pub target: Option<Sequence>,
    /// The image was joined with other images into one sequence.
    pub merged: bool,
}

impl Transition {
    /// The label reported for the sequence: `Merge` overrides the pattern.
    pub fn label(&self) -> Rule {
        if self.merged {
            Rule::Merge
        } else {
            self.pattern
        }
    }
}

/// Pattern rule and image of one sequence, from its outer neighbours.
/// A sequence covering the whole word shifts left like `Move+`.
fn pattern(w: &OrientationWord, s: Sequence) -> (Rule, Option<Sequence>) {
    let n = w.len();
    let shift = |start: usize, delta: isize| ((start as isize + delta).rem_euclid(n as isize)) as usize;
    if s.len == n {
        return (Rule::MovePlus, Some(Sequence { start: 0, len: n }));
    }
    let before = w.at(s.start + n - 1);
    let after = w.at(s.start + s.len);
    match (before, after) {
        (true, true) => (Rule::MovePlus, Some(Sequence { start: shift(s.start, -1), len: s.len })),
        (false, false) => (Rule::MoveMinus, Some(Sequence { start: shift(s.start, 1), len: s.len })),
        (true, false) => (Rule::Expand, Some(Sequence { start: shift(s.start, -1), len: s.len + 2 })),
        (false, true) if s.len == 2 => (Rule::Disappear, None),
        (false, true) => (Rule::Reduce, Some(Sequence { start: shift(s.start, 1), len: s.len - 2 })),
    }
}

/// Joins images that touch end-to-start until none do.
fn coalesce(mut images: Vec<Sequence>, n: usize) -> Vec<Sequence> {
    loop {
        let mut joined = false;
        'outer: for a in 0..images.len() {
            for b in 0..images.len() {
                if a != b && (images[a].start + images[a].len) % n == images[b].start {
                    let merged = Sequence {
                        start: images[a].start,
                        len: images[a].len + images[b].len,
                    };
                    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                    images.swap_remove(hi);
                    images.swap_remove(lo);
                    images.push(merged.normalized(n));
                    joined = true;
                    break 'outer;
                }
            }
        }
        if !joined {
            let mut out: Vec<Sequence> = images.into_iter().map(|s| s.normalized(n)).collect();
            out.sort();
            return out;
        }
    }
}

/// Labels every sequence of `w` with the rule that produces `next`.
///
/// Fails with a calculus-violation error if `next` is not `step(w)` or if
/// the images predicted by the rules (after merging) do not reproduce the
/// sequences of `next` exactly.
pub fn classify_transition(w: &OrientationWord, next: &OrientationWord) -> Result<Vec<Transition>> {
    let stepped = w.step()?;
    if &stepped != next {
        return Err(Error::InvalidWord(format!("{next} is not the successor of {w}")));
    }
    let n = w.len();
    let dec = decompose(w);
    let next_seqs = decompose(next).sequences;
    let raw: Vec<(Sequence, Rule, Option<Sequence>)> = dec
        .sequences
        .iter()
        .map(|&s| {
            let (rule, image) = pattern(w, s);
            (s, rule, image)
        })
        .collect();
    let predicted = coalesce(raw.iter().filter_map(|x| x.2).collect(), n);
    let mut actual: Vec<Sequence> = next_seqs.iter().map(|s| s.normalized(n)).collect();
    actual.sort();
    if predicted != actual {
        return Err(Error::InvalidWord(format!(
            "calculus violation: {w} -> {next}: predicted {predicted:?}, found {actual:?}"
        )));
    }
    let mut hits: BTreeMap<Sequence, usize> = BTreeMap::new();
    let mut out: Vec<Transition> = raw
        .into_iter()
        .map(|(source, pattern, image)| {
            let target = image.and_then(|img| next_seqs.iter().copied().find(|t| t.contains(&img, n)));
            if let Some(t) = target {
                *hits.entry(t).or_default() += 1;
            }
            Transition {
                source,
                pattern,
                image,
                target,
                merged: false,
            }
        })
        .collect();
    for t in &mut out {
        if let Some(target) = t.target {
            t.merged = hits[&target] > 1;
        }
    }
    Ok(out)
}

/// Sequences of a word tracked with stable ids across rounds.
#[derive(Debug, Clone)]
pub struct SequenceTracker {
    word: OrientationWord,
    ids: Vec<(Sequence, usize)>,
    round: usize,
}

/// One tracked sequence during one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackedStep {
    pub round: usize,
    pub id: usize,
    pub len: usize,
    pub label: Rule,
    /// The id survives into the next round.
    pub survives: bool,
}

impl SequenceTracker {
    pub fn new(word: OrientationWord) -> Self {
        let ids: Vec<(Sequence, usize)> = decompose(&word)
            .sequences
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        Self {
            word,
            ids,
            round: 0,
        }
    }

    pub fn word(&self) -> &OrientationWord {
        &self.word
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// `(id, length)` of the live sequences, ordered by id.
    pub fn lengths(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self.ids.iter().map(|&(s, id)| (id, s.len)).collect();
        v.sort();
        v
    }

    /// Advances one round. A merged sequence keeps the id of its longest
    /// source (lowest id on ties); the other sources are labelled `Merge`.
    pub fn advance(&mut self) -> Result<Vec<TrackedStep>> {
        let next = self.word.step()?;
        let transitions = classify_transition(&self.word, &next)?;
        let next_seqs = decompose(&next).sequences;
        let id_of = |s: &Sequence| {
            self.ids
                .iter()
                .find(|(x, _)| x == s)
                .map(|&(_, id)| id)
                .expect("every current sequence has an id")
        };
        let mut new_ids = Vec::with_capacity(next_seqs.len());
        for target in &next_seqs {
            let owner = transitions
                .iter()
                .filter(|t| t.target == Some(*target))
                .map(|t| (t.source.len, id_of(&t.source)))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
                .map(|(_, id)| id);
            match owner {
                Some(id) => new_ids.push((*target, id)),
                None => {
                    return Err(Error::InvalidWord(format!(
                        "sequence {target:?} of {next} has no source in {}",
                        self.word
                    )))
                }
            }
        }
        let steps = transitions
            .iter()
            .map(|t| {
                let id = id_of(&t.source);
                TrackedStep {
                    round: self.round,
                    id,
                    len: t.source.len,
                    label: t.label(),
                    survives: new_ids.iter().any(|&(_, x)| x == id),
                }
            })
            .collect();
        self.word = next;
        self.ids = new_ids;
        self.round += 1;
        Ok(steps)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evolution {
    pub rounds: usize,
    /// `history[k]` holds `(sequence id, length)` at round `k`.
    pub history: Vec<Vec<(usize, usize)>>,
    pub final_word: String,
}

impl Evolution {
    /// Rows `round,sequence_id,length`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("round,sequence_id,length\n");
        for (k, row) in self.history.iter().enumerate() {
            for (id, len) in row {
                out.push_str(&format!("{k},{id},{len}\n"));
            }
        }
        out
    }
}

/// Steps the word until it is interlaced. Fails if that takes more than
/// `n` rounds.
pub fn evolve_until_interlaced(w: &OrientationWord) -> Result<Evolution> {
    if w.n_bal() == 0 {
        return Err(Error::NoBalancedPair);
    }
    let mut tracker = SequenceTracker::new(w.clone());
    let mut history = vec![tracker.lengths()];
    while !tracker.word().is_interlaced()? {
        if tracker.round() >= w.len() {
            return Err(Error::InvalidWord(format!(
                "{w} not interlaced after {} rounds",
                tracker.round()
            )));
        }
        tracker.advance()?;
        history.push(tracker.lengths());
    }
    Ok(Evolution {
        rounds: tracker.round(),
        history,
        final_word: tracker.word().to_string(),
    })
}

/// Outcome of checking the sequence lemmas on one word.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub rounds_to_interlace: usize,
    pub transitions: usize,
    pub violations: Vec<String>,
}

/// Checks the sequence lemmas along `horizon` rounds from `w`:
///
/// * the number of sequences never grows;
/// * every image moves each end of its sequence by at most one position;
/// * a sequence that starts to Reduce keeps reducing and disappears after
///   exactly `l / 2` rounds;
/// * a sequence moving against the majority direction (Move- when
///   `n+ >= n-`, Move+ otherwise) never expands or turns, and ends by
///   disappearing or merging;
/// * with balanced words a shorter-than-`n` Move+ sequence ends the same way;
/// * interlacing happens in fewer than `n_bal` rounds, and balanced words
///   then form a single sequence of length `n`.
pub fn check_lemmas(w: &OrientationWord, horizon: usize) -> Result<LemmaReport> {
    let n = w.len();
    let mut report = LemmaReport::default();
    let evo = evolve_until_interlaced(w)?;
    report.rounds_to_interlace = evo.rounds;
    if evo.rounds > 0 && evo.rounds >= w.n_bal() {
        report
            .violations
            .push(format!("{w}: interlaced after {} rounds, n_bal = {}", evo.rounds, w.n_bal()));
    }
    if w.is_balanced() {
        let last: OrientationWord = evo.final_word.parse()?;
        let seqs = decompose(&last).sequences;
        if seqs != [Sequence { start: 0, len: n }] {
            report
                .violations
                .push(format!("{w}: balanced interlaced word {last} is not one full sequence"));
        }
    }

    let mut tracker = SequenceTracker::new(w.clone());
    let mut per_id: BTreeMap<usize, Vec<(Rule, usize, bool)>> = BTreeMap::new();
    for _ in 0..horizon {
        let before = decompose(tracker.word()).sequences.len();
        let word = tracker.word().clone();
        let transitions = classify_transition(&word, &word.step()?)?;
        for t in &transitions {
            if let Some(img) = t.image {
                if t.source.len < n && img.len < n {
                    let d_start = (img.start + n - t.source.start) % n;
                    let end_src = t.source.start + t.source.len;
                    let d_end = (img.start + img.len + n - end_src % n) % n;
                    let ok = |d: usize| d <= 1 || d == n - 1;
                    if !ok(d_start) || !ok(d_end) {
                        report.violations.push(format!(
                            "{word}: {:?} moved to {:?}",
                            t.source, img
                        ));
                    }
                }
            }
        }
        report.transitions += transitions.len();
        for s in tracker.advance()? {
            per_id.entry(s.id).or_default().push((s.label, s.len, s.survives));
        }
        let after = decompose(tracker.word()).sequences.len();
        if after > before {
            report
                .violations
                .push(format!("{word}: sequence count grew from {before} to {after}"));
        }
    }

    let minority = if w.n_plus() >= w.n_minus() {
        Rule::MoveMinus
    } else {
        Rule::MovePlus
    };
    let forbidden_after_minority = if minority == Rule::MoveMinus {
        [Rule::Expand, Rule::MovePlus]
    } else {
        [Rule::Expand, Rule::MoveMinus]
    };
    for (id, labels) in &per_id {
        let last_alive = labels.last().is_some_and(|x| x.2);
        if let Some(k) = labels.iter().position(|x| matches!(x.0, Rule::Reduce | Rule::Disappear)) {
            let rest = &labels[k..];
            let len0 = rest[0].1;
            let clean = rest.iter().all(|x| matches!(x.0, Rule::Reduce | Rule::Disappear));
            let finished = rest.last().map(|x| x.0) == Some(Rule::Disappear);
            if !clean || (finished && rest.len() != len0 / 2) || (!finished && !last_alive) {
                report
                    .violations
                    .push(format!("{w}: sequence {id} reduce run {rest:?}"));
            }
        }
        if let Some(k) = labels.iter().position(|x| x.0 == minority) {
            let rest = &labels[k..];
            if rest.iter().any(|x| forbidden_after_minority.contains(&x.0)) {
                report
                    .violations
                    .push(format!("{w}: sequence {id} turned after {minority}: {rest:?}"));
            }
            if last_alive {
                report
                    .violations
                    .push(format!("{w}: sequence {id} still {minority} after {horizon} rounds"));
            }
        }
        if w.is_balanced() {
            if let Some(k) = labels.iter().position(|x| x.0 == Rule::MovePlus && x.1 < n) {
                let rest = &labels[k..];
                if rest.iter().any(|x| matches!(x.0, Rule::Expand | Rule::MoveMinus)) || last_alive {
                    report
                        .violations
                        .push(format!("{w}: balanced Move+ sequence {id} did not end: {rest:?}"));
                }
            }
        }
    }
    Ok(report)
}

/// Every word of length `n` with at least one `+` and one `-`.
pub fn all_words(n: usize) -> impl Iterator<Item = OrientationWord> {
    assert!((2..64).contains(&n), "exhaustive enumeration supports 2 <= n < 64");
    (1..(1u64 << n) - 1).map(move |m| OrientationWord::from_mask(m, n).expect("n >= 2"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> OrientationWord {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_counts() {
        let x = w("++−-");
        assert_eq!(x.to_string(), "++--");
        assert_eq!((x.n_plus(), x.n_minus(), x.n_bal()), (2, 2, 2));
        assert!("+".parse::<OrientationWord>().is_err());
        assert!("+x".parse::<OrientationWord>().is_err());
    }

    #[test]
    fn step_examples() {
        assert_eq!(w("+-").step().unwrap(), w("-+"));
        assert_eq!(w("++--").step().unwrap(), w("+-+-"));
        assert_eq!(w("++-+").step().unwrap(), w("+-++"));
        assert!(matches!(w("++++").step(), Err(Error::NoBalancedPair)));
    }

    #[test]
    fn interlacing_examples() {
        assert_eq!(w("+-+-").interlacing_witness().unwrap(), Some(vec![0, 2]));
        assert_eq!(w("++--").interlacing_witness().unwrap(), None);
        assert!(w("----").is_interlaced().is_err());
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(decompose(&w("+-+-")).sequences, vec![Sequence { start: 0, len: 4 }]);
        let d = decompose(&w("++--"));
        assert_eq!(d.sequences, vec![Sequence { start: 1, len: 2 }]);
        assert_eq!(d.letters, vec![0, 3]);
        // wraps the seam: positions 4 and 1 (1-based)
        let d = decompose(&w("--++"));
        assert_eq!(d.sequences, vec![Sequence { start: 3, len: 2 }]);
        assert!(decompose(&w("++++")).sequences.is_empty());
        assert_eq!(
            decompose(&w("+-+--+--")).sequences,
            vec![Sequence { start: 0, len: 4 }, Sequence { start: 5, len: 2 }]
        );
    }

    #[test]
    fn rule_examples() {
        let label = |s: &str| {
            let x = w(s);
            classify_transition(&x, &x.step().unwrap()).unwrap()
        };
        // +[+-]- expands
        let t = label("++--");
        assert_eq!((t[0].label(), t[0].image.unwrap().len), (Rule::Expand, 4));
        // -[+-+-]+ reduces
        let t = label("-+-+-++-");
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].label(), Rule::Reduce);
        assert_eq!(t[0].image.unwrap(), Sequence { start: 2, len: 2 });
        // +[+-]+ shifts left
        let t = label("++-++");
        assert_eq!(t[0].label(), Rule::MovePlus);
        assert_eq!(t[0].image.unwrap(), Sequence { start: 0, len: 2 });
        // -[+-]- shifts right
        let t = label("-+--");
        assert_eq!(t[0].label(), Rule::MoveMinus);
        // -[+-]+ with length 2 disappears
        let t = label("-+-++-");
        assert!(t.iter().any(|x| x.label() == Rule::Disappear));
    }

    #[test]
    fn merge_is_detected() {
        // a Move+ image lands right before an expanding neighbour
        let x = w("++-++--");
        let t = classify_transition(&x, &x.step().unwrap()).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|s| s.label() == Rule::Merge), "{t:?}");
        assert_eq!(t[0].pattern, Rule::MovePlus);
        assert_eq!(t[1].pattern, Rule::Expand);
        assert_eq!(decompose(&x.step().unwrap()).sequences, vec![Sequence { start: 3, len: 6 }]);
        let mut tracker = SequenceTracker::new(x);
        assert_eq!(tracker.lengths(), vec![(0, 2), (1, 2)]);
        tracker.advance().unwrap();
        // equal lengths: the lower id survives
        assert_eq!(tracker.lengths(), vec![(0, 6)]);
    }

    #[test]
    fn evolution_examples() {
        assert_eq!(evolve_until_interlaced(&w("+-")).unwrap().rounds, 0);
        let e = evolve_until_interlaced(&w("++--")).unwrap();
        assert_eq!(e.rounds, 1);
        assert_eq!(e.history, vec![vec![(0, 2)], vec![(0, 4)]]);
        assert!(e.to_csv_string().starts_with("round,sequence_id,length\n0,0,2\n1,0,4\n"));
    }

    #[test]
    fn calculus_is_sound_for_small_words() {
        for n in 2..=8 {
            for x in all_words(n) {
                let next = x.step().unwrap();
                classify_transition(&x, &next).unwrap();
            }
        }
    }

    #[test]
    fn rejects_non_successor() {
        assert!(classify_transition(&w("++--"), &w("++--")).is_err());
    }
}
