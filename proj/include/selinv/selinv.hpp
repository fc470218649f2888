#ifndef SELINV_SELINV_HPP_
#define SELINV_SELINV_HPP_

#include "selinv/types.hpp"
#include "selinv/dense.hpp"
#include "selinv/sparse_matrix.hpp"
#include "selinv/matrix_market.hpp"
#include "selinv/ordering.hpp"
#include "selinv/symbolic.hpp"
#include "selinv/factor.hpp"
#include "selinv/inversion.hpp"
#include "selinv/oracle.hpp"
#include "selinv/sched.hpp"

#endif  // SELINV_SELINV_HPP_
