#include <set>

#include "calliper/poi.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace calliper;

namespace {

// Provider that counts how many texts it actually embedded.
class CountingProvider : public TextEmbeddingProvider {
public:
    explicit CountingProvider(std::size_t dim, bool wrong_dim = false)
        : dim_(dim), wrong_dim_(wrong_dim) {}
    std::size_t dim() const override { return dim_; }
    std::vector<std::vector<float>> embed_texts(const std::vector<std::string>& texts) override {
        texts_embedded += texts.size();
        std::vector<std::vector<float>> out;
        for (const auto& text : texts) {
            std::vector<float> v(wrong_dim_ ? dim_ + 1 : dim_, 0.0f);
            v[0] = static_cast<float>(fnv1a64(text) % 1000) / 1000.0f;
            out.push_back(std::move(v));
        }
        return out;
    }
    std::size_t texts_embedded = 0;

private:
    std::size_t dim_;
    bool wrong_dim_;
};

}  // namespace

TEST_CASE("parse_poi_csv: a quoted retail row parses field by field") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("pois.csv"),
                         "id,x,y,group,class,kind\n"
                         "p1,536366.19,190390.01,Retail,Bakery,Sells\n");
    auto pois = parse_poi_csv(dir.file("pois.csv"));
    REQUIRE(pois.size() == 1);
    CHECK(pois[0].x == doctest::Approx(536366.19));
    CHECK(pois[0].y == doctest::Approx(190390.01));
    CHECK(pois[0].group_label == "Retail");
    CHECK(pois[0].class_label == "Bakery");
    CHECK(pois[0].kind == ClassKind::Sells);
}

TEST_CASE("parse_poi_csv: kind column optional, quoted fields, custom schema") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("pois.csv"),
                         "poi_id,easting,northing,grp,cls\n"
                         "a,1,2,\"Eating, Drinking\",Cafe\n");
    PoiCsvSchema schema;
    schema.id = "poi_id";
    schema.x = "easting";
    schema.y = "northing";
    schema.group = "grp";
    schema.cls = "cls";
    auto pois = parse_poi_csv(dir.file("pois.csv"), schema);
    REQUIRE(pois.size() == 1);
    CHECK(pois[0].group_label == "Eating, Drinking");
    CHECK(pois[0].kind == ClassKind::Generic);
}

TEST_CASE("parse_poi_csv error cases") {
    testutil::TempDir dir;
    SUBCASE("header-only file") {
        testutil::write_file(dir.file("f.csv"), "id,x,y,group,class\n");
        CHECK_THROWS_AS(parse_poi_csv(dir.file("f.csv")), EmptyFileError);
    }
    SUBCASE("missing column") {
        testutil::write_file(dir.file("f.csv"), "id,x,group,class\na,1,G,C\n");
        CHECK_THROWS_AS(parse_poi_csv(dir.file("f.csv")), MissingColumnError);
    }
    SUBCASE("malformed coordinate names the row") {
        testutil::write_file(dir.file("f.csv"), "id,x,y,group,class\na,abc,2,G,C\n");
        CHECK_THROWS_WITH_AS(parse_poi_csv(dir.file("f.csv")), doctest::Contains("row 2"),
                             MalformedRowError);
    }
    SUBCASE("empty label rejected") {
        testutil::write_file(dir.file("f.csv"), "id,x,y,group,class\na,1,2,G,  \n");
        CHECK_THROWS_AS(parse_poi_csv(dir.file("f.csv")), MalformedRowError);
    }
    SUBCASE("unknown kind rejected") {
        testutil::write_file(dir.file("f.csv"), "id,x,y,group,class,kind\na,1,2,G,C,buys\n");
        CHECK_THROWS_AS(parse_poi_csv(dir.file("f.csv")), MalformedRowError);
    }
}

TEST_CASE("poi csv: parse -> serialize -> parse round-trips exactly") {
    testutil::TempDir dir;
    SyntheticWorldConfig config;
    config.regions = 3;
    config.pois_per_region = 40;
    config.heldout_points = 10;
    config.seed = 5;
    auto world = generate_synthetic_world(config);
    write_poi_csv(dir.file("a.csv"), world.pois);
    auto parsed = parse_poi_csv(dir.file("a.csv"));
    REQUIRE(parsed.size() == world.pois.size());
    CHECK(parsed == world.pois);
    write_poi_csv(dir.file("b.csv"), parsed);
    CHECK(testutil::read_file(dir.file("a.csv")) == testutil::read_file(dir.file("b.csv")));
}

TEST_CASE("render_prompt follows the three templates") {
    Poi poi;
    poi.group_label = "Eating and Drinking";
    poi.class_label = "Restaurant";
    CHECK(render_prompt(poi) == "A place of Restaurant, a type of Eating and Drinking");

    poi.group_label = "Retail";
    poi.class_label = "Shoes";
    poi.kind = ClassKind::Sells;
    CHECK(render_prompt(poi) == "A place that sells Shoes, a type of Retail");

    poi.group_label = "Manufacturing and Production";
    poi.class_label = "Furniture";
    poi.kind = ClassKind::Produces;
    CHECK(render_prompt(poi) ==
          "A place that produces Furniture, a type of Manufacturing and Production");
}

TEST_CASE("render_prompt is injective on distinct label triples") {
    const std::vector<std::string> groups{"Retail", "Transport"};
    const std::vector<std::string> classes{"Bakery", "Bus Stop", "Garage"};
    const std::vector<ClassKind> kinds{ClassKind::Generic, ClassKind::Sells, ClassKind::Produces};
    std::set<std::string> prompts;
    std::size_t total = 0;
    for (const auto& g : groups) {
        for (const auto& c : classes) {
            for (auto k : kinds) {
                Poi poi;
                poi.group_label = g;
                poi.class_label = c;
                poi.kind = k;
                prompts.insert(render_prompt(poi));
                ++total;
            }
        }
    }
    CHECK(prompts.size() == total);
}

TEST_CASE("build_training_pairs embeds each distinct prompt once, keeps order") {
    std::vector<Poi> pois(3);
    pois[0] = {"a", 1.0, 2.0, "G", "C1", ClassKind::Generic};
    pois[1] = {"b", 3.0, 4.0, "G", "C2", ClassKind::Generic};
    pois[2] = {"c", 5.0, 6.0, "G", "C1", ClassKind::Generic};
    CountingProvider provider(4);
    auto pairs = build_training_pairs(pois, provider);
    REQUIRE(pairs.size() == 3);
    CHECK(provider.texts_embedded == 2);  // two distinct prompts
    CHECK(pairs[0].location == Coord{1.0, 2.0});
    CHECK(pairs[2].location == Coord{5.0, 6.0});
    CHECK(pairs[0].prompt == pairs[2].prompt);
    CHECK(pairs[0].text_embedding == pairs[2].text_embedding);
    CHECK(pairs[0].text_embedding != pairs[1].text_embedding);
}

TEST_CASE("build_training_pairs: empty input and wrong provider dimension") {
    CountingProvider provider(4);
    CHECK(build_training_pairs({}, provider).empty());

    std::vector<Poi> pois(1);
    pois[0] = {"a", 1.0, 2.0, "G", "C", ClassKind::Generic};
    CountingProvider bad(4, /*wrong_dim=*/true);
    CHECK_THROWS_AS(build_training_pairs(pois, bad), ProviderFailure);
}

TEST_CASE("split_dataset: exact 7/1/2 on 10 points, deterministic, partition") {
    LabeledPointSet set;
    for (int i = 0; i < 10; ++i) {
        set.points.push_back({double(i), 0.0});
        set.class_labels.push_back(i % 2);
    }
    auto a = split_dataset(set, {0.7, 0.1, 0.2}, 0);
    CHECK(a.indices_of(Split::Train).size() == 7);
    CHECK(a.indices_of(Split::Val).size() == 1);
    CHECK(a.indices_of(Split::Test).size() == 2);

    auto b = split_dataset(set, {0.7, 0.1, 0.2}, 0);
    CHECK(a.split_assignment == b.split_assignment);
    auto c = split_dataset(set, {0.7, 0.1, 0.2}, 1);
    CHECK(a.split_assignment != c.split_assignment);

    // Every index lands in exactly one split (assignment is total).
    CHECK(a.split_assignment.size() == 10);
}

TEST_CASE("split_dataset: 4994 points split 7:1:2 lands on 3496/499/999") {
    LabeledPointSet set;
    for (int i = 0; i < 4994; ++i) {
        set.points.push_back({double(i), 1.0});
        set.class_labels.push_back(0);
    }
    auto split = split_dataset(set, {0.7, 0.1, 0.2}, 7);
    const auto n_train = split.indices_of(Split::Train).size();
    const auto n_val = split.indices_of(Split::Val).size();
    const auto n_test = split.indices_of(Split::Test).size();
    CHECK(n_train + n_val + n_test == 4994);
    CHECK(std::llabs(static_cast<long long>(n_train) - 3496) <= 1);
    CHECK(std::llabs(static_cast<long long>(n_val) - 499) <= 1);
    CHECK(std::llabs(static_cast<long long>(n_test) - 999) <= 1);
}

TEST_CASE("split_dataset rejects bad ratios") {
    LabeledPointSet set;
    set.points.push_back({0.0, 0.0});
    set.class_labels.push_back(0);
    CHECK_THROWS_AS(split_dataset(set, {0.5, 0.5, 0.5}, 0), RatioInvalidError);
    CHECK_THROWS_AS(split_dataset(set, {1.0, 0.0, 0.0}, 0), RatioInvalidError);
}

TEST_CASE("synthetic world: vocabularies stay inside their regions") {
    SyntheticWorldConfig config;
    config.regions = 5;
    config.pois_per_region = 200;
    config.vocab_per_region = 6;
    config.heldout_points = 50;
    config.seed = 7;
    auto world = generate_synthetic_world(config);
    CHECK(world.pois.size() == 1000);
    CHECK(world.heldout.size() == 50);

    for (const auto& poi : world.pois) {
        const std::size_t region = world.region_of(poi.location());
        const auto& vocab = world.vocab[region];
        CHECK(std::find(vocab.begin(), vocab.end(), poi.class_label) != vocab.end());
    }
    // Disjointness across regions.
    std::set<std::string> all;
    std::size_t total = 0;
    for (const auto& vocab : world.vocab) {
        all.insert(vocab.begin(), vocab.end());
        total += vocab.size();
    }
    CHECK(all.size() == total);
}

TEST_CASE("synthetic world: same config+seed twice gives identical worlds") {
    SyntheticWorldConfig config;
    config.regions = 4;
    config.pois_per_region = 100;
    config.seed = 3;
    config.heldout_points = 20;
    auto a = generate_synthetic_world(config);
    auto b = generate_synthetic_world(config);
    CHECK(a.pois == b.pois);
    CHECK(a.sites == b.sites);
    CHECK(a.heldout.points == b.heldout.points);
    CHECK(a.heldout.class_labels == b.heldout.class_labels);
}

TEST_CASE("synthetic world rejects degenerate configs") {
    SyntheticWorldConfig config;
    config.regions = 1;
    CHECK_THROWS_AS(generate_synthetic_world(config), ConfigInvalidError);
}

TEST_CASE("labeled csv round trip for both task kinds") {
    testutil::TempDir dir;
    SUBCASE("classification") {
        LabeledPointSet set;
        set.points = {{1.5, 2.5}, {3.0, 4.0}};
        set.class_labels = {0, 3};
        write_labeled_csv(dir.file("luc.csv"), set);
        auto back = read_labeled_csv(dir.file("luc.csv"));
        CHECK(back.points == set.points);
        CHECK(back.class_labels == set.class_labels);
        CHECK_FALSE(back.is_distribution());
    }
    SUBCASE("distribution") {
        LabeledPointSet set;
        set.points = {{1.0, 2.0}};
        set.distributions = MatF(1, 3);
        set.distributions(0, 0) = 0.25f;
        set.distributions(0, 1) = 0.5f;
        set.distributions(0, 2) = 0.25f;
        write_labeled_csv(dir.file("sdm.csv"), set);
        auto back = read_labeled_csv(dir.file("sdm.csv"));
        REQUIRE(back.is_distribution());
        CHECK(back.distributions == set.distributions);
    }
    SUBCASE("distribution rows must sum to one") {
        testutil::write_file(dir.file("bad.csv"), "x,y,p1,p2\n0,0,0.9,0.3\n");
        CHECK_THROWS_AS(read_labeled_csv(dir.file("bad.csv")), NotADistributionError);
    }
}
