#ifndef ATD_TESTS_SUPPORT_HPP
#define ATD_TESTS_SUPPORT_HPP

#include <gtest/gtest.h>

#include "atd/error.hpp"

// Category of the atd::Error thrown by `f`; records a failure if none is thrown.
template<typename F>
atd::ErrorCategory category_of(F&& f) {
    try {
        f();
    } catch (const atd::Error& e) {
        return e.category();
    }
    ADD_FAILURE() << "no error raised";
    return atd::ErrorCategory::io;
}

#endif
