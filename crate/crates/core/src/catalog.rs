//! Users, contents and ratings in the MovieLens-1M double-colon layout.
//!
//! Parsing works on in-memory text so the model stays free of IO; the std
//! companion crate reads the files and hands their contents over.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContentId(pub u32);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    M,
    F,
}

/// The six age cohorts used in user profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeCohort {
    Under18,
    From18To24,
    From25To34,
    From35To45,
    From46To55,
    Over56,
}

impl AgeCohort {
    /// Maps a MovieLens-1M age code. Codes 45 (45-49) and 50 (50-55) both
    /// fall into the 46-55 cohort.
    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            1 => Self::Under18,
            18 => Self::From18To24,
            25 => Self::From25To34,
            35 => Self::From35To45,
            45 | 50 => Self::From46To55,
            56 => Self::Over56,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Under18 => "Under 18",
            Self::From18To24 => "18-24",
            Self::From25To34 => "25-34",
            Self::From35To45 => "35-45",
            Self::From46To55 => "46-55",
            Self::Over56 => "56+",
        }
    }
}

const OCCUPATIONS: [&str; 21] = [
    "other",
    "academic/educator",
    "artist",
    "clerical/admin",
    "college/grad student",
    "customer service",
    "doctor/health care",
    "executive/managerial",
    "farmer",
    "homemaker",
    "K-12 student",
    "lawyer",
    "programmer",
    "retired",
    "sales/marketing",
    "scientist",
    "self-employed",
    "technician/engineer",
    "tradesman/craftsman",
    "unemployed",
    "writer",
];

/// One of the 21 occupation categories, stored as its MovieLens code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Occupation(u8);

impl Occupation {
    pub const COUNT: usize = OCCUPATIONS.len();

    pub fn from_code(code: u32) -> Option<Self> {
        (code < Self::COUNT as u32).then_some(Self(code as u8))
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn label(self) -> &'static str {
        OCCUPATIONS[self.0 as usize]
    }
}

macro_rules! genres {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Genre { $($variant),+ }

        impl Genre {
            pub const ALL: &'static [Genre] = &[$(Genre::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $(Genre::$variant => $name),+ }
            }
        }

        impl FromStr for Genre {
            type Err = ();
            fn from_str(s: &str) -> Result<Self, ()> {
                match s { $($name => Ok(Genre::$variant),)+ _ => Err(()) }
            }
        }
    };
}

genres! {
    Action => "Action",
    Adventure => "Adventure",
    Animation => "Animation",
    Childrens => "Children's",
    Comedy => "Comedy",
    Crime => "Crime",
    Documentary => "Documentary",
    Drama => "Drama",
    Fantasy => "Fantasy",
    FilmNoir => "Film-Noir",
    Horror => "Horror",
    Musical => "Musical",
    Mystery => "Mystery",
    Romance => "Romance",
    SciFi => "Sci-Fi",
    Thriller => "Thriller",
    War => "War",
    Western => "Western",
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: UserId,
    pub gender: Gender,
    pub age: AgeCohort,
    pub occupation: Occupation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentItem {
    pub content_id: ContentId,
    pub title: String,
    pub genres: Vec<Genre>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub user: UserId,
    pub content: ContentId,
    pub stars: u8,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingLog {
    pub entries: Vec<Rating>,
}

impl RatingLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rating counts per content.
    pub fn counts(&self) -> BTreeMap<ContentId, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.entries {
            *counts.entry(r.content).or_insert(0) += 1;
        }
        counts
    }

    /// Rated contents per user, in log order.
    pub fn contents_by_user(&self) -> BTreeMap<UserId, Vec<ContentId>> {
        let mut by_user: BTreeMap<UserId, Vec<ContentId>> = BTreeMap::new();
        for r in &self.entries {
            by_user.entry(r.user).or_default().push(r.content);
        }
        by_user
    }
}

/// Users sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfiles {
    users: Vec<UserProfile>,
}

impl UserProfiles {
    pub fn new(mut users: Vec<UserProfile>) -> Result<Self, DatasetError> {
        users.sort_by_key(|u| u.user_id);
        if let Some(w) = users.windows(2).find(|w| w[0].user_id == w[1].user_id) {
            return Err(DatasetError::DuplicateUser(w[0].user_id));
        }
        Ok(Self { users })
    }

    pub fn as_slice(&self) -> &[UserProfile] {
        &self.users
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn get(&self, id: UserId) -> Option<&UserProfile> {
        self.users
            .binary_search_by_key(&id, |u| u.user_id)
            .ok()
            .map(|i| &self.users[i])
    }
}

/// Contents sorted by id, all of the same size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentCatalog {
    items: Vec<ContentItem>,
    size_bytes: u32,
}

impl ContentCatalog {
    pub fn new(mut items: Vec<ContentItem>, size_bytes: u32) -> Result<Self, DatasetError> {
        items.sort_by_key(|c| c.content_id);
        if let Some(w) = items.windows(2).find(|w| w[0].content_id == w[1].content_id) {
            return Err(DatasetError::DuplicateContent(w[0].content_id));
        }
        Ok(Self { items, size_bytes })
    }

    pub fn items(&self) -> &[ContentItem] {
        &self.items
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = ContentId> + '_ {
        self.items.iter().map(|c| c.content_id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn size_bytes(&self) -> u32 {
        self.size_bytes
    }

    pub fn get(&self, id: ContentId) -> Option<&ContentItem> {
        self.items
            .binary_search_by_key(&id, |c| c.content_id)
            .ok()
            .map(|i| &self.items[i])
    }

    pub fn contains(&self, id: ContentId) -> bool {
        self.get(id).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFile {
    Users,
    Contents,
    Ratings,
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Users => "users",
            Self::Contents => "contents",
            Self::Ratings => "ratings",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("{file} line {line}: {reason}")]
    Malformed {
        file: SourceFile,
        line: usize,
        reason: String,
    },
    #[error("ratings line {line}: unknown user {user}")]
    DanglingUser { line: usize, user: UserId },
    #[error("ratings line {line}: unknown content {content}")]
    DanglingContent { line: usize, content: ContentId },
    #[error("duplicate user id {0}")]
    DuplicateUser(UserId),
    #[error("duplicate content id {0}")]
    DuplicateContent(ContentId),
    #[error("ratings line {line}: user {user} already rated content {content}")]
    DuplicateRating {
        line: usize,
        user: UserId,
        content: ContentId,
    },
    #[error("catalog keeps {requested} contents but only {available} exist")]
    TooFewContents { requested: usize, available: usize },
    #[error("catalog keeps {requested} users but only {available} exist")]
    TooFewUsers { requested: usize, available: usize },
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn malformed(file: SourceFile, line: usize, reason: impl ToString) -> DatasetError {
    DatasetError::Malformed {
        file,
        line,
        reason: reason.to_string(),
    }
}

fn field<T: FromStr>(file: SourceFile, line: usize, name: &str, raw: &str) -> Result<T, DatasetError> {
    raw.trim()
        .parse()
        .map_err(|_| malformed(file, line, alloc::format!("bad {name} {raw:?}")))
}

/// Parses `UserID::Gender::Age::Occupation::Zip` records.
pub fn parse_users(text: &str) -> Result<UserProfiles, DatasetError> {
    const F: SourceFile = SourceFile::Users;
    let mut users = Vec::new();
    for (line, rec) in records(text) {
        let parts: Vec<&str> = rec.split("::").collect();
        if parts.len() != 5 {
            return Err(malformed(F, line, alloc::format!("expected 5 fields, found {}", parts.len())));
        }
        let user_id = UserId(field(F, line, "user id", parts[0])?);
        if user_id.0 == 0 {
            return Err(malformed(F, line, "user id must be positive"));
        }
        let gender = match parts[1].trim() {
            "M" => Gender::M,
            "F" => Gender::F,
            other => return Err(malformed(F, line, alloc::format!("bad gender {other:?}"))),
        };
        let age_code: u32 = field(F, line, "age code", parts[2])?;
        let age = AgeCohort::from_code(age_code)
            .ok_or_else(|| malformed(F, line, alloc::format!("unknown age code {age_code}")))?;
        let occ_code: u32 = field(F, line, "occupation", parts[3])?;
        let occupation = Occupation::from_code(occ_code)
            .ok_or_else(|| malformed(F, line, alloc::format!("unknown occupation {occ_code}")))?;
        users.push(UserProfile {
            user_id,
            gender,
            age,
            occupation,
        });
    }
    UserProfiles::new(users)
}

/// Parses `MovieID::Title::Genre1|Genre2|...` records.
pub fn parse_contents(text: &str, size_bytes: u32) -> Result<ContentCatalog, DatasetError> {
    const F: SourceFile = SourceFile::Contents;
    let mut items = Vec::new();
    for (line, rec) in records(text) {
        let (id, rest) = rec
            .split_once("::")
            .ok_or_else(|| malformed(F, line, "missing field separator"))?;
        let (title, genres) = rest
            .rsplit_once("::")
            .ok_or_else(|| malformed(F, line, "expected 3 fields"))?;
        let content_id = ContentId(field(F, line, "content id", id)?);
        if content_id.0 == 0 {
            return Err(malformed(F, line, "content id must be positive"));
        }
        let genres = genres
            .split('|')
            .filter(|g| !g.is_empty())
            .map(|g| g.parse::<Genre>().map_err(|_| malformed(F, line, alloc::format!("unknown genre {g:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        items.push(ContentItem {
            content_id,
            title: title.to_string(),
            genres,
        });
    }
    ContentCatalog::new(items, size_bytes)
}

/// Parses `UserID::MovieID::Rating::Timestamp` records. Cross references are
/// checked by [`Dataset::new`].
pub fn parse_ratings(text: &str) -> Result<Vec<(usize, Rating)>, DatasetError> {
    const F: SourceFile = SourceFile::Ratings;
    let mut out = Vec::new();
    for (line, rec) in records(text) {
        let parts: Vec<&str> = rec.split("::").collect();
        if parts.len() != 4 {
            return Err(malformed(F, line, alloc::format!("expected 4 fields, found {}", parts.len())));
        }
        let stars: u8 = field(F, line, "rating", parts[2])?;
        if !(1..=5).contains(&stars) {
            return Err(malformed(F, line, alloc::format!("rating {stars} outside 1..=5")));
        }
        out.push((
            line,
            Rating {
                user: UserId(field(F, line, "user id", parts[0])?),
                content: ContentId(field(F, line, "content id", parts[1])?),
                stars,
                timestamp: field(F, line, "timestamp", parts[3])?,
            },
        ));
    }
    Ok(out)
}

/// A cross-checked dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub users: UserProfiles,
    pub catalog: ContentCatalog,
    pub ratings: RatingLog,
}

impl Dataset {
    pub fn new(
        users: UserProfiles,
        catalog: ContentCatalog,
        ratings: Vec<(usize, Rating)>,
    ) -> Result<Self, DatasetError> {
        let mut seen = BTreeSet::new();
        let mut entries = Vec::with_capacity(ratings.len());
        for (line, r) in ratings {
            if users.get(r.user).is_none() {
                return Err(DatasetError::DanglingUser { line, user: r.user });
            }
            if !catalog.contains(r.content) {
                return Err(DatasetError::DanglingContent {
                    line,
                    content: r.content,
                });
            }
            if !seen.insert((r.user, r.content)) {
                return Err(DatasetError::DuplicateRating {
                    line,
                    user: r.user,
                    content: r.content,
                });
            }
            entries.push(r);
        }
        Ok(Self {
            users,
            catalog,
            ratings: RatingLog { entries },
        })
    }

    /// Parses and cross-checks the three record files.
    pub fn parse(users: &str, contents: &str, ratings: &str, content_size_bytes: u32) -> Result<Self, DatasetError> {
        Self::new(
            parse_users(users)?,
            parse_contents(contents, content_size_bytes)?,
            parse_ratings(ratings)?,
        )
    }

    /// Keeps the `n_users` lowest user ids and the `n_contents` most-rated
    /// contents among their ratings (ties by ascending id, unrated contents
    /// fill up in ascending id order). Ratings outside the kept sets are
    /// dropped.
    pub fn truncate(&self, n_users: usize, n_contents: usize) -> Result<Self, DatasetError> {
        if n_users > self.users.len() {
            return Err(DatasetError::TooFewUsers {
                requested: n_users,
                available: self.users.len(),
            });
        }
        if n_contents > self.catalog.len() {
            return Err(DatasetError::TooFewContents {
                requested: n_contents,
                available: self.catalog.len(),
            });
        }
        let kept_users: Vec<UserProfile> = self.users.as_slice()[..n_users].to_vec();
        let user_set: BTreeSet<UserId> = kept_users.iter().map(|u| u.user_id).collect();
        let user_log = RatingLog {
            entries: self
                .ratings
                .entries
                .iter()
                .filter(|r| user_set.contains(&r.user))
                .copied()
                .collect(),
        };
        let counts = user_log.counts();
        let mut order: Vec<ContentId> = self.catalog.ids().collect();
        order.sort_by_key(|id| (core::cmp::Reverse(counts.get(id).copied().unwrap_or(0)), *id));
        let content_set: BTreeSet<ContentId> = order.into_iter().take(n_contents).collect();
        let items = self
            .catalog
            .items()
            .iter()
            .filter(|c| content_set.contains(&c.content_id))
            .cloned()
            .collect();
        Ok(Self {
            users: UserProfiles::new(kept_users)?,
            catalog: ContentCatalog::new(items, self.catalog.size_bytes())?,
            ratings: RatingLog {
                entries: user_log
                    .entries
                    .into_iter()
                    .filter(|r| content_set.contains(&r.content))
                    .collect(),
            },
        })
    }
}

/// Per-user random train/test split.
///
/// A user with `n >= 2` ratings puts `round(test_fraction * n)` of them in
/// test, at least one and at most `n - 1`; a user with one rating keeps it in
/// train. Entry order of the input log is preserved in both outputs.
pub fn split_ratings(log: &RatingLog, test_fraction: f64, seed: u64) -> (RatingLog, RatingLog) {
    let mut by_user: BTreeMap<UserId, Vec<usize>> = BTreeMap::new();
    for (idx, r) in log.entries.iter().enumerate() {
        by_user.entry(r.user).or_default().push(idx);
    }
    let mut is_test = alloc::vec![false; log.entries.len()];
    for (user, mut idxs) in by_user {
        let n = idxs.len();
        if n < 2 {
            continue;
        }
        let t = (libm::round(test_fraction * n as f64) as usize).clamp(1, n - 1);
        let mut rng = stream_rng(seed, Stream::Split, user.0 as u64, 0);
        idxs.shuffle(&mut rng);
        for &i in &idxs[..t] {
            is_test[i] = true;
        }
    }
    let (mut train, mut test) = (RatingLog::default(), RatingLog::default());
    for (r, t) in log.entries.iter().zip(is_test) {
        if t {
            test.entries.push(*r);
        } else {
            train.entries.push(*r);
        }
    }
    (train, test)
}

/// Which platoon vehicle serves which users. Vehicle indices are 0-based;
/// index 0 is the leader.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleAssignment {
    users_of_vehicle: Vec<Vec<UserId>>,
    vehicle_of_user: BTreeMap<UserId, usize>,
}

impl VehicleAssignment {
    pub fn vehicle_of(&self, user: UserId) -> Option<usize> {
        self.vehicle_of_user.get(&user).copied()
    }

    pub fn users_of(&self, vehicle: usize) -> &[UserId] {
        self.users_of_vehicle.get(vehicle).map_or(&[], Vec::as_slice)
    }

    pub fn vehicles(&self) -> usize {
        self.users_of_vehicle.len()
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &[UserId])> {
        self.users_of_vehicle.iter().map(Vec::as_slice).enumerate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AssignError {
    #[error("platoon must have at least one vehicle")]
    NoVehicles,
    #[error("{vehicles} vehicles but only {users} users: some vehicle would serve nobody")]
    TooFewUsers { vehicles: usize, users: usize },
}

/// Contiguous ascending id blocks, leader first; the first `N_u mod N`
/// vehicles take one extra user.
pub fn assign_users(profiles: &UserProfiles, vehicles: usize) -> Result<VehicleAssignment, AssignError> {
    if vehicles == 0 {
        return Err(AssignError::NoVehicles);
    }
    let n_users = profiles.len();
    if vehicles > n_users {
        return Err(AssignError::TooFewUsers {
            vehicles,
            users: n_users,
        });
    }
    let (base, extra) = (n_users / vehicles, n_users % vehicles);
    let mut users = profiles.as_slice().iter().map(|u| u.user_id);
    let mut users_of_vehicle = Vec::with_capacity(vehicles);
    let mut vehicle_of_user = BTreeMap::new();
    for v in 0..vehicles {
        let block: Vec<UserId> = users.by_ref().take(base + usize::from(v < extra)).collect();
        for u in &block {
            vehicle_of_user.insert(*u, v);
        }
        users_of_vehicle.push(block);
    }
    Ok(VehicleAssignment {
        users_of_vehicle,
        vehicle_of_user,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use proptest::prelude::*;

    fn users(n: u32) -> UserProfiles {
        UserProfiles::new(
            (1..=n)
                .map(|i| UserProfile {
                    user_id: UserId(i),
                    gender: Gender::F,
                    age: AgeCohort::From25To34,
                    occupation: Occupation::from_code(0).unwrap(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parses_movielens_user_line() {
        let u = parse_users("1::F::1::10::48067\n").unwrap();
        assert_eq!(
            u.as_slice()[0],
            UserProfile {
                user_id: UserId(1),
                gender: Gender::F,
                age: AgeCohort::Under18,
                occupation: Occupation::from_code(10).unwrap(),
            }
        );
        assert_eq!(u.as_slice()[0].occupation.label(), "K-12 student");
    }

    #[test]
    fn parses_contents_with_colons_in_title() {
        let c = parse_contents("1::Toy Story (1995)::Animation|Children's|Comedy\n2::A: B (2000)::Drama\n", 100).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.items()[0].genres, [Genre::Animation, Genre::Childrens, Genre::Comedy]);
        assert_eq!(c.items()[1].title, "A: B (2000)");
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_users("1::F::1::10::48067\n\n2::X::1::10::1\n").unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { file: SourceFile::Users, line: 3, .. }), "{err}");
        let err = parse_ratings("1::1::6::0\n").unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { line: 1, .. }));
        let err = parse_contents("1::T::Action|Polka\n", 100).unwrap_err();
        assert!(format!("{err}").contains("Polka"));
    }

    #[test]
    fn empty_ratings_file_is_empty_log() {
        let d = Dataset::parse("1::M::25::0::1\n", "1::T::Drama\n", "", 100).unwrap();
        assert!(d.ratings.is_empty());
    }

    #[test]
    fn dangling_and_duplicate_references_are_rejected() {
        let err = Dataset::parse("1::M::25::0::1\n", "1::T::Drama\n", "1::99999::4::5\n", 100).unwrap_err();
        assert_eq!(
            err,
            DatasetError::DanglingContent {
                line: 1,
                content: ContentId(99999)
            }
        );
        let err = Dataset::parse("1::M::25::0::1\n", "1::T::Drama\n", "2::1::4::5\n", 100).unwrap_err();
        assert!(matches!(err, DatasetError::DanglingUser { .. }));
        let err = parse_users("1::M::25::0::1\n1::F::25::0::1\n").unwrap_err();
        assert_eq!(err, DatasetError::DuplicateUser(UserId(1)));
        let err = Dataset::parse("1::M::25::0::1\n", "1::T::Drama\n", "1::1::4::5\n1::1::3::6\n", 100).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateRating { line: 2, .. }));
    }

    #[test]
    fn truncate_keeps_most_rated_contents() {
        let d = Dataset::parse(
            "1::M::25::0::1\n2::F::25::0::1\n3::F::25::0::1\n",
            "1::A::Drama\n2::B::Drama\n3::C::Drama\n4::D::Drama\n",
            "1::3::4::1\n2::3::4::1\n1::2::4::1\n3::4::5::1\n3::1::5::1\n",
            100,
        )
        .unwrap();
        let t = d.truncate(2, 2).unwrap();
        assert_eq!(t.users.len(), 2);
        // Counts among users 1,2: c3=2, c2=1, others 0.
        assert_eq!(t.catalog.ids().collect::<Vec<_>>(), [ContentId(2), ContentId(3)]);
        assert_eq!(t.ratings.len(), 3);
        assert!(d.truncate(4, 1).is_err());
    }

    fn log_for(user: u32, n: u32) -> RatingLog {
        RatingLog {
            entries: (1..=n)
                .map(|c| Rating {
                    user: UserId(user),
                    content: ContentId(c),
                    stars: 3,
                    timestamp: c as i64,
                })
                .collect(),
        }
    }

    #[test]
    fn split_counts_per_user() {
        let (train, test) = split_ratings(&log_for(1, 10), 0.2, 9);
        assert_eq!((train.len(), test.len()), (8, 2));
        let (train, test) = split_ratings(&log_for(1, 1), 0.2, 9);
        assert_eq!((train.len(), test.len()), (1, 0));
        let (_, test) = split_ratings(&log_for(1, 2), 0.2, 9);
        assert_eq!(test.len(), 1);
        assert_eq!(split_ratings(&log_for(1, 10), 0.2, 9), split_ratings(&log_for(1, 10), 0.2, 9));
    }

    #[test]
    fn assignment_examples() {
        let a = assign_users(&users(30), 10).unwrap();
        assert_eq!(a.users_of(0), [UserId(1), UserId(2), UserId(3)]);
        assert_eq!(a.users_of(1), [UserId(4), UserId(5), UserId(6)]);
        let a = assign_users(&users(5), 1).unwrap();
        assert_eq!(a.users_of(0).len(), 5);
        let a = assign_users(&users(7), 3).unwrap();
        assert_eq!(a.blocks().map(|(_, b)| b.len()).collect::<Vec<_>>(), [3, 2, 2]);
        assert_eq!(
            assign_users(&users(3), 4).unwrap_err(),
            AssignError::TooFewUsers { vehicles: 4, users: 3 }
        );
    }

    proptest! {
        #[test]
        fn assignment_partitions_users(n_users in 1u32..200, n in 1usize..50) {
            prop_assume!(n <= n_users as usize);
            let a = assign_users(&users(n_users), n).unwrap();
            let mut all: Vec<UserId> = a.blocks().flat_map(|(_, b)| b.iter().copied()).collect();
            let sizes: Vec<usize> = a.blocks().map(|(_, b)| b.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
            all.dedup();
            prop_assert_eq!(all.len(), n_users as usize);
            for (v, b) in a.blocks() {
                for u in b {
                    prop_assert_eq!(a.vehicle_of(*u), Some(v));
                }
            }
        }

        #[test]
        fn split_is_a_partition(counts in proptest::collection::vec(1u32..25, 1..8), frac in 0.05f64..0.95, seed: u64) {
            let mut log = RatingLog::default();
            for (u, n) in counts.iter().enumerate() {
                log.entries.extend(log_for(u as u32 + 1, *n).entries);
            }
            let (train, test) = split_ratings(&log, frac, seed);
            let mut joined: Vec<(UserId, ContentId)> =
                train.entries.iter().chain(&test.entries).map(|r| (r.user, r.content)).collect();
            joined.sort();
            let mut orig: Vec<(UserId, ContentId)> = log.entries.iter().map(|r| (r.user, r.content)).collect();
            orig.sort();
            prop_assert_eq!(joined, orig);
            for (u, n) in counts.iter().enumerate() {
                let t = test.entries.iter().filter(|r| r.user.0 == u as u32 + 1).count();
                if *n >= 2 { prop_assert!(t >= 1 && t < *n as usize); } else { prop_assert_eq!(t, 0); }
            }
        }
    }
}
