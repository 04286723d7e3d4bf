#include <doctest.h>

#include <cmath>
#include <cstdio>

#include <jcpa/autodiff.hpp>

using namespace jcpa;
using namespace jcpa::ad;

TEST_CASE("init_params shapes and determinism") {
    SUBCASE("message MLP dims {5,16,32} yields 16x5 and 32x16") {
        ParamSet p;
        Rng rng(1);
        add_mlp_params(p, "phi1", {5, 16, 32}, rng);
        REQUIRE(p.count() == 4);
        CHECK(p.at(p.index_of("phi1.w0")).rows == 16);
        CHECK(p.at(p.index_of("phi1.w0")).cols == 5);
        CHECK(p.at(p.index_of("phi1.w1")).rows == 32);
        CHECK(p.at(p.index_of("phi1.w1")).cols == 16);
        for (double b : p.at(p.index_of("phi1.b0")).v) CHECK(b == 0.0);
        const double bound = std::sqrt(6.0 / (5 + 16));
        for (double w : p.at(p.index_of("phi1.w0")).v) CHECK(std::abs(w) <= bound);
    }
    SUBCASE("update MLP dims {33,16,8,1} yields three weight matrices") {
        ParamSet p;
        Rng rng(2);
        add_mlp_params(p, "alpha", {33, 16, 8, 1}, rng);
        CHECK(p.count() == 6);
        CHECK(p.at(p.index_of("alpha.w2")).rows == 1);
        CHECK(p.at(p.index_of("alpha.w2")).cols == 8);
    }
    SUBCASE("fixed seed reproduces parameters") {
        ParamSet a, b;
        Rng r1(42), r2(42);
        add_mlp_params(a, "m", {3, 4, 2}, r1);
        add_mlp_params(b, "m", {3, 4, 2}, r2);
        for (int t = 0; t < a.count(); ++t) CHECK(a.at(t).v == b.at(t).v);
    }
}

TEST_CASE("forward primitives") {
    ParamSet p;
    Rng rng(3);
    add_mlp_params(p, "l", {3, 2}, rng, InitScheme::Zero);
    p.at(p.index_of("l.b0")).v = {1.5, -2.0};
    Tape tape(p);

    SUBCASE("affine with zero weights returns the bias") {
        const int x = tape.constant(std::array<double, 3>{1.0, 2.0, 3.0});
        const int y = tape.affine(p.index_of("l.w0"), p.index_of("l.b0"), x);
        CHECK(tape.value(y)[0] == 1.5);
        CHECK(tape.value(y)[1] == -2.0);
    }
    SUBCASE("sigmoid(0) = 0.5") {
        const int y = tape.sigmoid(tape.constant(0.0));
        CHECK(tape.scalar(y) == doctest::Approx(0.5));
    }
    SUBCASE("sum-reduction") {
        const int y = tape.sum(tape.constant(std::array<double, 3>{1.0, 2.0, 3.0}));
        CHECK(tape.scalar(y) == doctest::Approx(6.0));
    }
    SUBCASE("elementwise ops and clamps") {
        const int a = tape.constant(std::array<double, 2>{4.0, -1.0});
        const int b = tape.constant(std::array<double, 2>{2.0, 0.5});
        CHECK(tape.value(tape.add(a, b))[0] == 6.0);
        CHECK(tape.value(tape.sub(a, b))[1] == -1.5);
        CHECK(tape.value(tape.mul(a, b))[0] == 8.0);
        CHECK(tape.value(tape.div(a, b))[1] == -2.0);
        CHECK(tape.value(tape.clamp_min(a, 0.0))[1] == 0.0);
        CHECK(tape.value(tape.clamp_max(a, 1.0))[0] == 1.0);
        CHECK(tape.value(tape.relu(a))[1] == 0.0);
        CHECK(tape.value(tape.log(tape.relu(b)))[0] == doctest::Approx(std::log(2.0)));
    }
    SUBCASE("shape mismatch raises") {
        const int a = tape.constant(std::array<double, 2>{1.0, 2.0});
        const int b = tape.constant(0.0);
        CHECK_THROWS_AS(tape.add(a, b), Error);
        CHECK_THROWS_AS(tape.affine(p.index_of("l.w0"), p.index_of("l.b0"), b), Error);
    }
    SUBCASE("non-finite intermediate names the node") {
        const int a = tape.constant(1.0);
        const int z = tape.constant(0.0);
        try {
            (void)tape.div(a, z);
            FAIL("expected Error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("div") != std::string::npos);
        }
    }
}

TEST_CASE("backward: constants, linear sums, clamps") {
    ParamSet p;
    Rng rng(4);
    add_mlp_params(p, "l", {2, 2}, rng);
    Tape tape(p);
    GradBuffer grads(p);

    SUBCASE("constant root has zero gradients") {
        const int c = tape.constant(3.0);
        tape.backward(c, grads);
        for (int t = 0; t < p.count(); ++t)
            for (double g : grads.at(t)) CHECK(g == 0.0);
    }
    SUBCASE("root = sum of parameters has unit gradients") {
        // Route every parameter into the root through affine with unit input.
        const int x = tape.constant(std::array<double, 2>{1.0, 1.0});
        const int y = tape.affine(p.index_of("l.w0"), p.index_of("l.b0"), x);
        const int root = tape.sum(y);
        tape.backward(root, grads);
        for (double g : grads.at(p.index_of("l.w0"))) CHECK(g == 1.0);
        for (double g : grads.at(p.index_of("l.b0"))) CHECK(g == 1.0);
    }
    SUBCASE("root must be scalar") {
        const int v = tape.constant(std::array<double, 2>{1.0, 2.0});
        CHECK_THROWS_AS(tape.backward(v, grads), Error);
    }
}

TEST_CASE("fd_check on composite losses") {
    ParamSet p;
    Rng rng(5);
    add_mlp_params(p, "f", {3, 8, 4}, rng);
    add_mlp_params(p, "g", {5, 6, 1}, rng);
    Rng probe_rng(6);

    SUBCASE("constant loss: zero error") {
        const double err = fd_check(
            p, [](Tape& t) { return t.constant(7.0); }, 20, probe_rng);
        CHECK(err == 0.0);
    }
    SUBCASE("linear loss: error at rounding level") {
        const double err = fd_check(
            p,
            [&p](Tape& t) {
                const int x = t.constant(std::array<double, 3>{0.3, -1.2, 2.0});
                const int y = t.affine(p.index_of("f.w0"), p.index_of("f.b0"), x);
                return t.sum(y);
            },
            50, probe_rng);
        CHECK(err <= 1e-8);
    }
    SUBCASE("nonlinear composite matches central differences") {
        const double err = fd_check(
            p,
            [&p](Tape& t) {
                const int x = t.constant(std::array<double, 3>{0.3, -1.2, 2.0});
                const int h = t.relu(t.affine(p.index_of("f.w0"), p.index_of("f.b0"), x));
                const int y = t.affine(p.index_of("f.w1"), p.index_of("f.b1"), h);
                const int s = t.sigmoid(y);
                const int packed = t.concat(std::array<int, 2>{s, t.constant(0.5)});
                const int z = t.affine(p.index_of("g.w0"), p.index_of("g.b0"), packed);
                const int out = t.affine(p.index_of("g.w1"), p.index_of("g.b1"), t.relu(z));
                const int rate = t.log(t.add_const(t.mul(out, out), 1.0));
                return t.sum(rate);
            },
            100, probe_rng);
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("determinism: identical inputs give identical gradients") {
    ParamSet p;
    Rng rng(7);
    add_mlp_params(p, "f", {4, 8, 1}, rng);
    auto build = [&p](Tape& t) {
        const int x = t.constant(std::array<double, 4>{0.1, 0.2, 0.3, 0.4});
        const int h = t.relu(t.affine(p.index_of("f.w0"), p.index_of("f.b0"), x));
        return t.sum(t.sigmoid(t.affine(p.index_of("f.w1"), p.index_of("f.b1"), h)));
    };
    Tape t1(p), t2(p);
    GradBuffer g1(p), g2(p);
    t1.backward(build(t1), g1);
    t2.backward(build(t2), g2);
    for (int t = 0; t < p.count(); ++t) CHECK(g1.at(t) == g2.at(t));
}

TEST_CASE("optimizer steps") {
    ParamSet p;
    Rng rng(8);
    add_mlp_params(p, "f", {2, 2}, rng);
    GradBuffer grads(p);

    SUBCASE("zero gradient leaves parameters unchanged") {
        const ParamSet before = p;
        apply_step(p, grads, 0.1);
        for (int t = 0; t < p.count(); ++t) CHECK(p.at(t).v == before.at(t).v);
    }
    SUBCASE("descent moves against the gradient") {
        grads.at(0)[0] = 2.0;
        const double before = p.at(0).v[0];
        apply_step(p, grads, 0.25);
        CHECK(p.at(0).v[0] == doctest::Approx(before - 0.5));
    }
    SUBCASE("dual_step clamps at zero") {
        CHECK(dual_step(0.0, -5.0, 0.1) == 0.0);
        CHECK(dual_step(0.2, 1.0, 0.1) == doctest::Approx(0.3));
        std::vector<double> duals{0.0, 0.2};
        dual_step(duals, {-1.0, 1.0}, 0.1);
        CHECK(duals[0] == 0.0);
        CHECK(duals[1] == doctest::Approx(0.3));
    }
}

TEST_CASE("tape reset reuses storage") {
    ParamSet p;
    Rng rng(9);
    add_mlp_params(p, "f", {2, 3}, rng);
    Tape tape(p);
    const int x = tape.constant(std::array<double, 2>{1.0, -1.0});
    (void)tape.affine(p.index_of("f.w0"), p.index_of("f.b0"), x);
    const int n_before = tape.num_nodes();
    tape.reset();
    CHECK(tape.num_nodes() == 0);
    const int x2 = tape.constant(std::array<double, 2>{1.0, -1.0});
    (void)tape.affine(p.index_of("f.w0"), p.index_of("f.b0"), x2);
    CHECK(tape.num_nodes() == n_before);
}

TEST_CASE("checkpoint round trip") {
    ParamSet p;
    Rng rng(10);
    add_mlp_params(p, "phi1.0", {5, 16, 32}, rng);
    add_mlp_params(p, "alpha.0", {33, 16, 8, 1}, rng);
    const std::string path = "ckpt_roundtrip.bin";
    save_params(path, p, R"({"layers": 2, "p_max": 1.0})");
    ParamSet q;
    const std::string meta = load_params(path, q);
    CHECK(meta.find("layers") != std::string::npos);
    REQUIRE(q.count() == p.count());
    for (int t = 0; t < p.count(); ++t) {
        CHECK(q.at(t).name == p.at(t).name);
        CHECK(q.at(t).v == p.at(t).v);  // bit-exact
    }
    std::remove(path.c_str());

    SUBCASE("malformed file raises") {
        const std::string bad = "ckpt_bad.bin";
        {
            std::FILE* f = std::fopen(bad.c_str(), "wb");
            std::fputs("NOTMAGIC", f);
            std::fclose(f);
        }
        ParamSet junk;
        CHECK_THROWS_AS(load_params(bad, junk), Error);
        std::remove(bad.c_str());
    }
}
