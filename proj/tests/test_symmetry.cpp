#include "symmetry.hpp"

#include <doctest.h>

using namespace fishbone;

namespace {

IntegratorConfig config(Scheme scheme)
{
    IntegratorConfig c;
    c.scheme = scheme;
    c.t_end = 30.0;
    c.sample_every = 0.1;
    return c;
}

}  // namespace

TEST_CASE("sign flip maps solutions to solutions")
{
    for (Scheme scheme : {Scheme::FixedRK4, Scheme::AdaptiveEmbedded})
        for (const ModelSpec& spec :
             {ModelSpec::isolated(), ModelSpec::cross_deriv(0.03), ModelSpec::cross_deriv_zero(0.03)}) {
            CAPTURE(to_string(spec.variant()));
            CHECK(symmetry::check(spec, -1.0, -1.0, 20, config(scheme)) < 1e-9);
        }
}

TEST_CASE("torsional reflection in the isolated model")
{
    CHECK(symmetry::check(ModelSpec::isolated(), 1.0, -1.0, 20, config(Scheme::FixedRK4)) < 1e-9);
}

TEST_CASE("torsional reflection is broken by aerodynamic coupling")
{
    CHECK(symmetry::check(ModelSpec::cross_deriv(0.05), 1.0, -1.0, 3, config(Scheme::FixedRK4)) > 1e-6);
}
