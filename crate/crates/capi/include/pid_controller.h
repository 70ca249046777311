/*
 * pid_controller.h - C interface to the discrete PID controller library.
 *
 * The library holds exactly one controller, created by pid_init() with
 * K = 1, Ti = 1, Td = 0, Ts = 1 and no output limits. All other calls act on
 * that instance.
 *
 * Error protocol: no call aborts the host. Before pid_init(),
 * calculate_control() returns a quiet NaN and every call records error 1.
 * A setter given an invalid value leaves the controller untouched and
 * records error 2. pid_last_error() returns the most recent code and resets
 * it to 0.
 *
 * Threading: not thread-safe. Call from one thread, or serialize calls
 * externally.
 *
 * Symbol names: the original wrapper functions carried a trailing '!'
 * ("calculate_control!", "set_K!"); these exports use the same names without
 * it, so they can be declared and called directly from C.
 */
#ifndef PID_CONTROLLER_H
#define PID_CONTROLLER_H

#ifdef __cplusplus
extern "C" {
#endif

#define PID_OK 0
#define PID_ERR_UNINITIALIZED 1
#define PID_ERR_INVALID_PARAMETER 2

/* Create the global controller. Idempotent; returns 0. */
int pid_init(void);

/* Control signal for setpoint r, measurement y and feedforward uff. */
double calculate_control(double r, double y, double uff);

/* Change the proportional gain with bumpless transfer at (r, y). */
void set_K(double K, double r, double y);

/* Integral time; must be > 0 (INFINITY disables integral action). */
void set_Ti(double Ti);

/* Derivative time; must be finite and >= 0 (0 disables derivative action). */
void set_Td(double Td);

/* Zero the integral, derivative and previous-measurement state. */
void reset_state(void);

/* Most recent error code (PID_OK if none); clears it. */
int pid_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* PID_CONTROLLER_H */
