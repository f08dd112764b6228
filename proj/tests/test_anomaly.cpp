#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "fixtures.hpp"
#include "stvcheck/anomaly.hpp"
#include "stvcheck/blt.hpp"
#include "stvcheck/engine.hpp"

using namespace stv;

namespace {

Election ex2() { return Election::make(example_profile(), 2); }

BallotModification mod(ModKind k, std::vector<int> source, std::vector<int> result,
                       std::int64_t count) {
    return BallotModification{k, std::move(source), std::move(result), count};
}

AnomalyCertificate cert_of(AnomalyKind kind, int focal, std::vector<BallotModification> mods,
                           std::set<int> original, std::set<int> modified, int displaced = -1) {
    AnomalyCertificate c;
    c.kind = kind;
    c.seats = 2;
    c.focal = focal;
    c.displaced = displaced;
    c.modifications = std::move(mods);
    c.original_winners = std::move(original);
    c.modified_winners = std::move(modified);
    return c;
}

const AnomalyCertificate& find_cert(const std::vector<AnomalyCertificate>& certs,
                                    AnomalyKind kind, int focal, int displaced = -1) {
    for (const auto& c : certs)
        if (c.kind == kind && c.focal == focal && c.displaced == displaced)
            return c;
    static AnomalyCertificate missing;
    FAIL("no certificate for focal " << focal);
    return missing;
}

} // namespace

TEST_CASE("raising a winner can cost it the seat, and the replay proves it") {
    Election e = ex2();
    AnomalyCertificate c =
        cert_of(AnomalyKind::Upward, 1, {mod(ModKind::ShiftUp, {4, 1, 3}, {1, 4, 3}, 6)},
                {1, 4}, {2, 3});
    VerifyResult vr = verify_certificate(e, c);
    CHECK(vr.ok);
    CHECK(vr.reason.empty());
    CHECK(vr.certificate.flags == std::set<CertFlag>{CertFlag::IdenticalBallotsUsed});

    // The modified profile keeps the untouched remainder of the source type.
    PreferenceProfile p = apply_modifications(e.profile, c.modifications);
    const auto& b = p.ballots();
    CHECK(std::count(b.begin(), b.end(), BallotType{{4, 1, 3}, 2}) == 1);
    CHECK(std::count(b.begin(), b.end(), BallotType{{1, 4, 3}, 6}) == 1);
    CHECK(p.total_voters() == 501);
}

TEST_CASE("lowering a loser can win it the seat") {
    VerifyResult vr = verify_certificate(
        ex2(), cert_of(AnomalyKind::DownwardStrong, 2,
                       {mod(ModKind::ShiftDown, {2, 3, 1}, {3, 2, 1}, 6)}, {1, 4}, {2, 3}));
    CHECK(vr.ok);
    CHECK(vr.certificate.flags == std::set<CertFlag>{CertFlag::IdenticalBallotsUsed});
}

TEST_CASE("staying home can serve voters better than showing up") {
    VerifyResult vr = verify_certificate(
        ex2(), cert_of(AnomalyKind::NoShow, 3, {mod(ModKind::Remove, {2, 3, 1}, {}, 35)},
                       {1, 4}, {1, 3}, 4));
    CHECK(vr.ok);
    // The removed ballots rank the focal candidate in the top two, so the
    // reading is unambiguous.
    CHECK(vr.certificate.flags == std::set<CertFlag>{CertFlag::IdenticalBallotsUsed});
}

TEST_CASE("ambiguous abstentions are flagged, not rejected") {
    Election perth = Election::make(perth_profile(), 1);
    AnomalyCertificate c;
    c.kind = AnomalyKind::NoShow;
    c.seats = 1;
    c.focal = 1;
    c.displaced = 2;
    c.modifications = {mod(ModKind::Remove, {3, 1, 2}, {}, 151)};
    c.original_winners = {2};
    c.modified_winners = {1};
    VerifyResult vr = verify_certificate(perth, c);
    CHECK(vr.ok);
    CHECK(vr.certificate.flags ==
          std::set<CertFlag>{CertFlag::AmbiguousNoShow, CertFlag::IdenticalBallotsUsed});
}

TEST_CASE("electing fewer seats need not elect a subset") {
    auto certs = check_committee_size(ex2());
    REQUIRE(certs.size() == 1);
    const AnomalyCertificate& c = certs[0];
    CHECK(c.kind == AnomalyKind::CommitteeSize);
    CHECK(c.seats == 2);
    CHECK(c.alt_seats == 1);
    CHECK(c.focal == 2);
    CHECK(c.original_winners == std::set<int>{1, 4});
    CHECK(c.modified_winners == std::set<int>{2});
    CHECK(c.modifications.empty());
    CHECK(c.flags.empty());
    CHECK(verify_certificate(ex2(), c).ok);

    // Three seats against two shows the same failure one level up.
    auto three = check_committee_size(Election::make(example_profile(), 3));
    REQUIRE(three.size() == 1);
    CHECK(three[0].alt_seats == 2);
    CHECK(three[0].focal == 4);
    CHECK(three[0].original_winners == std::set<int>{1, 2, 3});
    CHECK(three[0].modified_winners == std::set<int>{1, 4});

    // Single-seat elections have nothing to compare.
    CHECK(check_committee_size(Election::make(perth_profile(), 1)).empty());
}

TEST_CASE("verification rejects ill-formed certificates") {
    Election e = ex2();
    AnomalyCertificate good =
        cert_of(AnomalyKind::Upward, 1, {mod(ModKind::ShiftUp, {4, 1, 3}, {1, 4, 3}, 6)},
                {1, 4}, {2, 3});
    REQUIRE(verify_certificate(e, good).ok);

    auto reason = [&](AnomalyCertificate c) {
        VerifyResult vr = verify_certificate(e, c);
        CHECK_FALSE(vr.ok);
        return vr.reason;
    };

    AnomalyCertificate c = good;
    c.seats = 1;
    CHECK(reason(c) == "certificate seat count does not match the election");

    c = good;
    c.focal = 9;
    CHECK(reason(c) == "focal candidate out of range");

    c = good;
    c.modifications.clear();
    CHECK(reason(c) == "no modifications");

    c = good;
    c.modifications[0].count = 0;
    CHECK(reason(c) == "modification count must be positive");

    c = good;
    c.modifications[0].count = 9; // only 8 such ballots exist
    CHECK(reason(c).find("modifications do not apply") == 0);

    c = good;
    c.modifications[0].kind = ModKind::ShiftDown;
    CHECK(reason(c) == "not a valid upward shift of the focal candidate");

    c = good;
    c.modifications[0].result = {4, 3, 1}; // moves the focal down instead
    CHECK(reason(c) == "not a valid upward shift of the focal candidate");

    c = good;
    c.modified_winners = {2, 4};
    CHECK(reason(c) == "winner sets do not match the certificate");

    // A legal shift that helps a non-winner is not an upward anomaly: the
    // focal candidate never held the seat it is claimed to lose.
    c = cert_of(AnomalyKind::Upward, 3, {mod(ModKind::ShiftUp, {2, 3, 1}, {3, 2, 1}, 6)},
                {1, 4}, {2, 3});
    CHECK(reason(c) == "raising the focal candidate did not cost it the seat");

    // Five shifted ballots leave the first exclusion tied; under the strict
    // policy the replay aborts rather than guessing.
    c = cert_of(AnomalyKind::Upward, 1, {mod(ModKind::ShiftUp, {4, 1, 3}, {1, 4, 3}, 5)},
                {1, 4}, {2, 3});
    CHECK(reason(c).find("tie aborted the replay") == 0);

    c = cert_of(AnomalyKind::DownwardStrong, 2,
                {mod(ModKind::ShiftUp, {2, 3, 1}, {3, 2, 1}, 6)}, {1, 4}, {2, 3});
    CHECK(reason(c) == "not a valid downward shift of the focal candidate");

    c = cert_of(AnomalyKind::DownwardWeak, 2,
                {mod(ModKind::ShiftDown, {2, 3, 1}, {3, 2, 1}, 6)}, {1, 4}, {2, 3});
    CHECK(reason(c) == "weak downward certificate without a bullet rewrite is a strong one");

    c = cert_of(AnomalyKind::NoShow, 3, {mod(ModKind::Remove, {2, 3, 1}, {}, 35)},
                {1, 4}, {1, 3}, 0);
    CHECK(reason(c) == "displaced candidate out of range");

    c = cert_of(AnomalyKind::NoShow, 3, {mod(ModKind::Remove, {2, 1, 4, 3}, {}, 5)},
                {1, 4}, {1, 3}, 4);
    CHECK(reason(c) == "removed ballots must rank the focal above the displaced winner");

    c = cert_of(AnomalyKind::NoShow, 3, {mod(ModKind::Remove, {3, 4, 2, 1}, {}, 5)},
                {1, 4}, {1, 3}, 4);
    CHECK(reason(c) == "removed ballots must not rank the displaced winner in the top seats");

    // The published no-show example with the wrong displaced winner named:
    // everything replays, but the swap is not the one certified.
    c = cert_of(AnomalyKind::NoShow, 3, {mod(ModKind::Remove, {2, 3, 1}, {}, 35)},
                {1, 4}, {1, 3}, 1);
    CHECK(reason(c) == "removals do not swap exactly the displaced winner for the focal");

    // Committee-size shapes.
    c = AnomalyCertificate{};
    c.kind = AnomalyKind::CommitteeSize;
    c.seats = 2;
    c.focal = 2;
    c.alt_seats = 1;
    c.original_winners = {1, 4};
    c.modified_winners = {2};
    REQUIRE(verify_certificate(e, c).ok);
    AnomalyCertificate cs = c;
    cs.alt_seats = 2;
    CHECK(reason(cs) == "alt_seats must be a smaller positive seat count");
    cs = c;
    cs.modifications = {mod(ModKind::ShiftUp, {4, 1, 3}, {1, 4, 3}, 1)};
    CHECK(reason(cs) == "committee-size certificates carry no ballot changes");
    cs = c;
    cs.modified_winners = {2, 3};
    CHECK(reason(cs) == "winner sets do not match the certificate");

    Election e3 = Election::make(example_profile(), 3);
    AnomalyCertificate contained;
    contained.kind = AnomalyKind::CommitteeSize;
    contained.seats = 3;
    contained.alt_seats = 1;
    contained.focal = 2;
    contained.original_winners = {1, 2, 3};
    contained.modified_winners = {2};
    VerifyResult vr = verify_certificate(e3, contained);
    CHECK_FALSE(vr.ok);
    CHECK(vr.reason == "smaller committee is contained in the larger one");

    AnomalyCertificate witness;
    witness.kind = AnomalyKind::CommitteeSize;
    witness.seats = 3;
    witness.alt_seats = 2;
    witness.focal = 1; // in both committees
    witness.original_winners = {1, 2, 3};
    witness.modified_winners = {1, 4};
    vr = verify_certificate(e3, witness);
    CHECK_FALSE(vr.ok);
    CHECK(vr.reason == "focal candidate is not a containment witness");
}

TEST_CASE("modification application is exact bookkeeping") {
    PreferenceProfile p = example_profile();

    PreferenceProfile removed =
        apply_modifications(p, {mod(ModKind::Remove, {1, 2}, {}, 19)});
    CHECK(removed.total_voters() == 482);
    for (const auto& b : removed.ballots())
        CHECK(b.ranking != std::vector<int>{1, 2});

    // Results merge into existing types.
    PreferenceProfile merged =
        apply_modifications(p, {mod(ModKind::ShiftUp, {2, 3, 1}, {3, 1}, 10)});
    auto it = std::find_if(merged.ballots().begin(), merged.ballots().end(),
                           [](const BallotType& b) { return b.ranking == std::vector<int>{3, 1}; });
    REQUIRE(it != merged.ballots().end());
    CHECK(it->count == 67);
    CHECK(merged.total_voters() == 501);

    // Sequential consumption of one source is tracked across modifications.
    CHECK_NOTHROW(apply_modifications(p, {mod(ModKind::Remove, {4, 1, 3}, {}, 6),
                                          mod(ModKind::Remove, {4, 1, 3}, {}, 2)}));
    CHECK_THROWS_AS(apply_modifications(p, {mod(ModKind::Remove, {4, 1, 3}, {}, 6),
                                            mod(ModKind::Remove, {4, 1, 3}, {}, 3)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_modifications(p, {mod(ModKind::Remove, {1, 3}, {}, 1)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_modifications(p, {mod(ModKind::Remove, {1, 2}, {}, 0)}),
                    std::invalid_argument);
}

TEST_CASE("upward search recovers the minimal published certificate") {
    SearchOutcome out = search_upward(ex2());
    CHECK(out.probes_used > 0);
    CHECK_FALSE(out.truncated);
    for (const auto& c : out.certificates)
        CHECK(verify_certificate(ex2(), c).ok);

    const AnomalyCertificate& c = find_cert(out.certificates, AnomalyKind::Upward, 1);
    CHECK(c.modifications ==
          std::vector<BallotModification>{mod(ModKind::ShiftUp, {4, 1, 3}, {1, 4, 3}, 6)});
    CHECK(c.original_winners == std::set<int>{1, 4});
    CHECK(c.modified_winners == std::set<int>{2, 3});
    CHECK(c.flags == std::set<CertFlag>{CertFlag::IdenticalBallotsUsed});
}

TEST_CASE("downward search recovers the minimal published certificate") {
    SearchOutcome out = search_downward(ex2());
    CHECK_FALSE(out.truncated);
    for (const auto& c : out.certificates) {
        CHECK(verify_certificate(ex2(), c).ok);
        // No bullet ballots exist, so no weak-only certificate can.
        CHECK(c.kind != AnomalyKind::DownwardWeak);
    }

    const AnomalyCertificate& c = find_cert(out.certificates, AnomalyKind::DownwardStrong, 2);
    CHECK(c.modifications ==
          std::vector<BallotModification>{mod(ModKind::ShiftDown, {2, 3, 1}, {3, 2, 1}, 6)});
    CHECK(c.modified_winners == std::set<int>{2, 3});
    CHECK(c.flags == std::set<CertFlag>{CertFlag::IdenticalBallotsUsed});
}

TEST_CASE("abstention search recovers the minimal published certificate") {
    SearchOutcome out = search_no_show(ex2());
    CHECK_FALSE(out.truncated);
    for (const auto& c : out.certificates)
        CHECK(verify_certificate(ex2(), c).ok);

    const AnomalyCertificate& c = find_cert(out.certificates, AnomalyKind::NoShow, 3, 4);
    CHECK(c.modifications ==
          std::vector<BallotModification>{mod(ModKind::Remove, {2, 3, 1}, {}, 35)});
    CHECK(c.modified_winners == std::set<int>{1, 3});
    CHECK(c.flags == std::set<CertFlag>{CertFlag::IdenticalBallotsUsed});
}

TEST_CASE("decided-at-a-glance elections are not probed") {
    PreferenceProfile landslide = PreferenceProfile::canonical(
        {{1, "A", "", false}, {2, "B", "", false}}, {{{1}, 10}, {{2}, 3}});
    Election e = Election::make(landslide, 1);
    for (auto* search : {&search_upward, &search_downward, &search_no_show}) {
        SearchOutcome out = (*search)(e, {}, TiePolicy::Fail);
        CHECK(out.probes_used == 0);
        CHECK(out.certificates.empty());
        CHECK_FALSE(out.truncated);
    }

    PreferenceProfile all_seated = PreferenceProfile::canonical(
        {{1, "A", "", false}, {2, "B", "", false}}, {{{1}, 4}, {{2}, 3}});
    Election everyone = Election::make(all_seated, 2);
    for (auto* search : {&search_upward, &search_downward, &search_no_show}) {
        SearchOutcome out = (*search)(everyone, {}, TiePolicy::Fail);
        CHECK(out.probes_used == 0);
        CHECK(out.certificates.empty());
    }
}

TEST_CASE("the probe budget is a hard ceiling") {
    SearchBudget tight;
    tight.max_probes = 3;
    SearchOutcome out = search_upward(ex2(), tight);
    CHECK(out.probes_used == 3);
    CHECK(out.truncated);
    for (const auto& c : out.certificates)
        CHECK(verify_certificate(ex2(), c).ok);
}

TEST_CASE("the oracle refuses instances beyond its caps") {
    CHECK_THROWS_AS(exhaustive_oracle(ex2(), AnomalyKind::Upward), std::invalid_argument);
    OracleCaps loose;
    loose.max_candidates = 10;
    loose.max_types = 50;
    loose.max_voters = 1000;
    CHECK_NOTHROW(exhaustive_oracle(ex2(), AnomalyKind::CommitteeSize, loose));
}

TEST_CASE("oracle certificates replay on a small instance") {
    PreferenceProfile small = PreferenceProfile::canonical(
        {{1, "A", "", false}, {2, "B", "", false}, {3, "C", "", false}},
        {{{1, 2}, 6}, {{2}, 5}, {{3, 1}, 4}});
    Election e = Election::make(small, 1);
    for (AnomalyKind kind : {AnomalyKind::Upward, AnomalyKind::DownwardStrong,
                             AnomalyKind::DownwardWeak, AnomalyKind::NoShow}) {
        for (const auto& c : exhaustive_oracle(e, kind)) {
            CHECK(c.kind == kind);
            CHECK(verify_certificate(e, c).ok);
        }
    }
}

TEST_CASE("certificates survive the JSON round trip") {
    Election e = ex2();
    AnomalyCertificate c =
        cert_of(AnomalyKind::NoShow, 3, {mod(ModKind::Remove, {2, 3, 1}, {}, 35)},
                {1, 4}, {1, 3}, 4);
    c.flags = {CertFlag::IdenticalBallotsUsed};
    c.election_hash = canonical_hash(e, "Four candidate illustration");

    nlohmann::ordered_json j = certificate_to_json(c, e.profile, "Four candidate illustration");
    CHECK(j["schema"] == "stvcheck-certificate/1");
    CHECK(j["kind"] == "no_show");
    CHECK(j["election"]["seats"] == 2);
    CHECK(j["election"]["sha256"] == c.election_hash);
    CHECK(j["focal"]["id"] == 3);
    CHECK(j["focal"]["name"] == "Candidate C");
    CHECK(j["displaced"]["id"] == 4);
    CHECK(j["displaced"]["name"] == "Candidate D");
    CHECK(j["modifications"].size() == 1);
    CHECK(j["modifications"][0]["kind"] == "remove");
    CHECK(j["modifications"][0]["source"] == std::vector<int>{2, 3, 1});
    CHECK_FALSE(j["modifications"][0].contains("result"));
    CHECK(j["modifications"][0]["count"] == 35);
    CHECK(j["original_winners"] == std::vector<int>{1, 4});
    CHECK(j["modified_winners"] == std::vector<int>{1, 3});
    CHECK(j["flags"] == std::vector<std::string>{"identical_ballots_used"});
    CHECK(certificate_from_json(j) == c);

    AnomalyCertificate up =
        cert_of(AnomalyKind::Upward, 1, {mod(ModKind::ShiftUp, {4, 1, 3}, {1, 4, 3}, 6)},
                {1, 4}, {2, 3});
    up.election_hash = c.election_hash;
    nlohmann::ordered_json uj = certificate_to_json(up, e.profile, "t");
    CHECK_FALSE(uj.contains("displaced"));
    CHECK_FALSE(uj.contains("alt_seats"));
    CHECK(uj["modifications"][0]["result"] == std::vector<int>{1, 4, 3});
    CHECK(certificate_from_json(uj) == up);

    CHECK_THROWS_AS(certificate_from_json(nlohmann::json::object()), std::invalid_argument);
    nlohmann::json bad = j;
    bad["kind"] = "sideways";
    CHECK_THROWS_AS(certificate_from_json(bad), std::invalid_argument);
    bad = j;
    bad["modifications"][0]["kind"] = "swap";
    CHECK_THROWS_AS(certificate_from_json(bad), std::invalid_argument);
    bad = j;
    bad["flags"] = {"mystery"};
    CHECK_THROWS_AS(certificate_from_json(bad), std::invalid_argument);
}
