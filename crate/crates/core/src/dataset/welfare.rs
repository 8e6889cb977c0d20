//! Welfare benefit generators, full and simplified.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{labeled_dataset, Dataset, DatasetError, DatasetKind};
use crate::domain::encoding::{FEMALE, IN_PATIENT, MALE, OUT_PATIENT};
use crate::domain::{
    DomainId, DISTANCE_LIMIT, FEMALE_PENSION_AGE, MALE_PENSION_AGE, MIN_CONTRIBUTIONS,
    NOISE_FEATURES, RESOURCE_LIMIT,
};
use crate::seed::{rng, Rng};

/// Ages and distances on the full-domain dedicated grids.
const FULL_GRID: [i64; 20] = [
    5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90, 95, 100,
];
const FULL_GRID_REPEATS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Force {
    Satisfy,
    Fail,
    Free,
}

/// Condition positions in the full welfare list C1..C6.
const C1: usize = 0;
const C6: usize = 5;

fn pension_age(gender: i64) -> i64 {
    if gender == FEMALE {
        FEMALE_PENSION_AGE
    } else {
        MALE_PENSION_AGE
    }
}

fn contribution_masks(force: Force) -> Vec<u8> {
    (0u8..32)
        .filter(|m| {
            let paid = m.count_ones() as usize >= MIN_CONTRIBUTIONS;
            match force {
                Force::Satisfy => paid,
                Force::Fail => !paid,
                Force::Free => true,
            }
        })
        .collect()
}

struct Sampler {
    simplified: bool,
    masks: [Vec<u8>; 3],
}

impl Sampler {
    fn new(simplified: bool) -> Self {
        Sampler {
            simplified,
            masks: [
                contribution_masks(Force::Satisfy),
                contribution_masks(Force::Fail),
                contribution_masks(Force::Free),
            ],
        }
    }

    fn age_gender(&self, rng: &mut Rng, force: Force) -> (i64, i64) {
        let gender = if rng.gen::<bool>() { FEMALE } else { MALE };
        let threshold = pension_age(gender);
        let age = match force {
            Force::Satisfy => rng.gen_range(threshold..=100),
            Force::Fail => rng.gen_range(0..threshold),
            Force::Free => rng.gen_range(0..=100),
        };
        (age, gender)
    }

    fn contributions(&self, rng: &mut Rng, force: Force) -> [i64; 5] {
        let pool = match force {
            Force::Satisfy => &self.masks[0],
            Force::Fail => &self.masks[1],
            Force::Free => &self.masks[2],
        };
        let mask = *pool.choose(rng).expect("non-empty mask pool");
        std::array::from_fn(|i| i64::from((mask >> i) & 1))
    }

    fn flag(rng: &mut Rng, force: Force, satisfying: bool) -> i64 {
        let value = match force {
            Force::Satisfy => satisfying,
            Force::Fail => !satisfying,
            Force::Free => rng.gen(),
        };
        i64::from(value)
    }

    fn resources(rng: &mut Rng, force: Force) -> i64 {
        match force {
            Force::Satisfy => rng.gen_range(0..RESOURCE_LIMIT),
            Force::Fail => rng.gen_range(RESOURCE_LIMIT..=10_000),
            Force::Free => rng.gen_range(0..=10_000),
        }
    }

    fn patient_distance(rng: &mut Rng, force: Force) -> (i64, i64) {
        let kind = if rng.gen::<bool>() {
            OUT_PATIENT
        } else {
            IN_PATIENT
        };
        let near = 0..DISTANCE_LIMIT;
        let far = DISTANCE_LIMIT..101;
        // in-patients qualify when near, out-patients when far
        let qualifying = if kind == IN_PATIENT {
            near.clone()
        } else {
            far.clone()
        };
        let distance = match force {
            Force::Satisfy => rng.gen_range(qualifying),
            Force::Fail => rng.gen_range(if kind == IN_PATIENT { far } else { near }),
            Force::Free => rng.gen_range(0..=100),
        };
        (kind, distance)
    }

    /// Samples one case in schema order. `forces` is indexed C1..C6; the
    /// simplified domain reads only C1 and C6.
    fn sample(&self, rng: &mut Rng, forces: &[Force; 6]) -> Vec<i64> {
        let (age, gender) = self.age_gender(rng, forces[C1]);
        if self.simplified {
            let (kind, distance) = Self::patient_distance(rng, forces[C6]);
            return vec![age, gender, kind, distance];
        }
        let mut values = Vec::with_capacity(12 + NOISE_FEATURES);
        values.extend([age, gender]);
        values.extend(self.contributions(rng, forces[1]));
        values.push(Self::flag(rng, forces[2], true));
        values.push(Self::flag(rng, forces[3], false));
        values.push(Self::resources(rng, forces[4]));
        let (kind, distance) = Self::patient_distance(rng, forces[C6]);
        values.extend([kind, distance]);
        self.push_noise(rng, &mut values);
        values
    }

    fn push_noise(&self, rng: &mut Rng, values: &mut Vec<i64>) {
        if !self.simplified {
            values.extend((0..NOISE_FEATURES).map(|_| rng.gen_range(0..=100)));
        }
    }

    /// Schema positions of the welfare conditions (C1..C6) in use.
    fn active_conditions(&self) -> Vec<usize> {
        if self.simplified {
            vec![C1, C6]
        } else {
            (0..6).collect()
        }
    }
}

/// Generates a welfare (or simplified welfare) dataset.
///
/// `TypeA` and `TypeB` take an even `size`; the dedicated kinds are fixed
/// grids and reject one.
pub fn gen_welfare(
    kind: DatasetKind,
    size: Option<usize>,
    seed: u64,
    simplified: bool,
) -> Result<Dataset, DatasetError> {
    let domain = if simplified {
        DomainId::Simplified
    } else {
        DomainId::Welfare
    };
    super::GeneratorRequest::new(domain, kind, size, seed).validate()?;
    let sampler = Sampler::new(simplified);
    let mut rng = rng(seed);
    let rows = match kind {
        DatasetKind::TypeA | DatasetKind::TypeB => {
            let size = size.expect("validated");
            balanced(&sampler, &mut rng, size, kind == DatasetKind::TypeB)
        }
        DatasetKind::AgeGender if simplified => simplified_age_gender(),
        DatasetKind::PatientDistance if simplified => simplified_patient_distance(),
        DatasetKind::AgeGender => full_age_gender(&sampler, &mut rng),
        DatasetKind::PatientDistance => full_patient_distance(&sampler, &mut rng),
        _ => unreachable!("validated welfare kind"),
    };
    Ok(labeled_dataset(domain, kind, seed, rows))
}

/// Half eligible, half ineligible. Negatives are split over the conditions
/// in near-equal buckets (remainder round-robin); each bucket forces its
/// condition to fail. Type B additionally forces every other condition to
/// hold.
fn balanced(sampler: &Sampler, rng: &mut Rng, size: usize, exactly_one: bool) -> Vec<Vec<i64>> {
    let half = size / 2;
    let mut rows = Vec::with_capacity(size);
    for _ in 0..half {
        rows.push(sampler.sample(rng, &[Force::Satisfy; 6]));
    }
    let active = sampler.active_conditions();
    let background = if exactly_one {
        Force::Satisfy
    } else {
        Force::Free
    };
    for i in 0..half {
        let mut forces = [background; 6];
        forces[active[i % active.len()]] = Force::Fail;
        rows.push(sampler.sample(rng, &forces));
    }
    rows.shuffle(rng);
    rows
}

fn full_age_gender(sampler: &Sampler, rng: &mut Rng) -> Vec<Vec<i64>> {
    let mut forces = [Force::Satisfy; 6];
    forces[C1] = Force::Free;
    let mut rows = Vec::with_capacity(FULL_GRID.len() * 2 * FULL_GRID_REPEATS);
    for &age in &FULL_GRID {
        for gender in [MALE, FEMALE] {
            for _ in 0..FULL_GRID_REPEATS {
                let mut values = sampler.sample(rng, &forces);
                values[0] = age;
                values[1] = gender;
                rows.push(values);
            }
        }
    }
    rows
}

fn full_patient_distance(sampler: &Sampler, rng: &mut Rng) -> Vec<Vec<i64>> {
    let mut forces = [Force::Satisfy; 6];
    forces[C6] = Force::Free;
    let mut rows = Vec::with_capacity(FULL_GRID.len() * 2 * FULL_GRID_REPEATS);
    for &distance in &FULL_GRID {
        for kind in [IN_PATIENT, OUT_PATIENT] {
            for _ in 0..FULL_GRID_REPEATS {
                let mut values = sampler.sample(rng, &forces);
                values[10] = kind;
                values[11] = distance;
                rows.push(values);
            }
        }
    }
    rows
}

fn distance_grid() -> impl Iterator<Item = i64> {
    (0..=100).step_by(5)
}

/// Every age and gender, each paired with every distance on the 5-grid and
/// the patient type that satisfies C6 there: 101 x 2 x 21 = 4242 cases.
fn simplified_age_gender() -> Vec<Vec<i64>> {
    let mut rows = Vec::new();
    for age in 0..=100 {
        for gender in [MALE, FEMALE] {
            for distance in distance_grid() {
                let kind = if distance < DISTANCE_LIMIT {
                    IN_PATIENT
                } else {
                    OUT_PATIENT
                };
                rows.push(vec![age, gender, kind, distance]);
            }
        }
    }
    rows
}

/// Every distance on the 5-grid and patient type, each paired with every
/// age and gender satisfying C1: 21 x 2 x 77 = 3234 cases.
fn simplified_patient_distance() -> Vec<Vec<i64>> {
    let pensioners: Vec<(i64, i64)> = (0..=100)
        .flat_map(|age| [(age, MALE), (age, FEMALE)])
        .filter(|&(age, gender)| age >= pension_age(gender))
        .collect();
    let mut rows = Vec::new();
    for distance in distance_grid() {
        for kind in [IN_PATIENT, OUT_PATIENT] {
            for &(age, gender) in &pensioners {
                rows.push(vec![age, gender, kind, distance]);
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_domain;

    #[test]
    fn contribution_pools() {
        assert_eq!(contribution_masks(Force::Satisfy).len(), 6);
        assert_eq!(contribution_masks(Force::Fail).len(), 26);
        assert_eq!(contribution_masks(Force::Free).len(), 32);
    }

    #[test]
    fn type_a_sizes_and_balance() {
        let d = gen_welfare(DatasetKind::TypeA, Some(2400), 3, false).unwrap();
        assert_eq!(d.len(), 2400);
        assert_eq!(d.positives(), 1200);
        let schema = build_domain(DomainId::Welfare);
        assert!(d.cases.iter().all(|c| schema.validate(c).is_ok()));
    }

    #[test]
    fn type_b_buckets_are_near_equal() {
        let schema = build_domain(DomainId::Welfare);
        // 1003 negatives: the remainder goes to C1
        let d = gen_welfare(DatasetKind::TypeB, Some(2006), 9, false).unwrap();
        let mut per_condition = [0usize; 6];
        for case in d.cases.iter().filter(|c| c.label == Some(false)) {
            let failed: Vec<_> = schema
                .condition_values(&case.values)
                .iter()
                .enumerate()
                .filter(|(_, &holds)| !holds)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(failed.len(), 1);
            per_condition[failed[0]] += 1;
        }
        assert_eq!(per_condition, [168, 167, 167, 167, 167, 167]);
    }

    #[test]
    fn simplified_grids() {
        let ag = gen_welfare(DatasetKind::AgeGender, None, 1, true).unwrap();
        assert_eq!(ag.len(), 4242);
        assert_eq!(ag.positives(), 77 * 21);
        let pd = gen_welfare(DatasetKind::PatientDistance, None, 1, true).unwrap();
        assert_eq!(pd.len(), 3234);
        assert_eq!(pd.positives(), 3234 / 2);
        let again = gen_welfare(DatasetKind::PatientDistance, None, 99, true).unwrap();
        assert_eq!(pd, again);
    }

    #[test]
    fn full_dedicated_grids() {
        let ag = gen_welfare(DatasetKind::AgeGender, None, 1, false).unwrap();
        assert_eq!(ag.len(), 40_000);
        assert_eq!(ag.positives(), 17_000);
        let pd = gen_welfare(DatasetKind::PatientDistance, None, 1, false).unwrap();
        assert_eq!(pd.len(), 40_000);
        assert_eq!(pd.positives(), 20_000);
    }

    #[test]
    fn enumerated_kinds_reject_size() {
        let err = gen_welfare(DatasetKind::AgeGender, Some(10), 1, false).unwrap_err();
        assert!(matches!(err, DatasetError::SizeForbidden(_)));
    }
}
