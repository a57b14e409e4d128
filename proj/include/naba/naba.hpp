#pragma once

#include <naba/bae.hpp>
#include <naba/bethe.hpp>
#include <naba/chain.hpp>
#include <naba/errors.hpp>
#include <naba/form_factors.hpp>
#include <naba/random.hpp>
#include <naba/ratfun.hpp>
#include <naba/scalar_products.hpp>
#include <naba/tensor.hpp>
