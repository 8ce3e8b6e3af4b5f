// Filter-bank coefficient tables (decomposition/reconstruction, low/high pass).
// Values match the PyWavelets tables for the same names.

const HAAR_DEC_LO: [f64; 2] = [
    0.7071067811865476,
    0.7071067811865476,
];

const HAAR_DEC_HI: [f64; 2] = [
    -0.7071067811865476,
    0.7071067811865476,
];

const HAAR_REC_LO: [f64; 2] = [
    0.7071067811865476,
    0.7071067811865476,
];

const HAAR_REC_HI: [f64; 2] = [
    0.7071067811865476,
    -0.7071067811865476,
];

const DB9_DEC_LO: [f64; 18] = [
    3.93473203162716e-05,
    -0.0002519631889427101,
    0.00023038576352319597,
    0.0018476468830562265,
    -0.00428150368246343,
    -0.004723204757751397,
    0.022361662123679096,
    0.00025094711483145197,
    -0.06763282906132997,
    0.03072568147933338,
    0.14854074933810638,
    -0.09684078322297646,
    -0.2932737832791749,
    0.13319738582500756,
    0.6572880780513005,
    0.6048231236901112,
    0.24383467461259034,
    0.038077947363878345,
];

const DB9_DEC_HI: [f64; 18] = [
    -0.038077947363878345,
    0.24383467461259034,
    -0.6048231236901112,
    0.6572880780513005,
    -0.13319738582500756,
    -0.2932737832791749,
    0.09684078322297646,
    0.14854074933810638,
    -0.03072568147933338,
    -0.06763282906132997,
    -0.00025094711483145197,
    0.022361662123679096,
    0.004723204757751397,
    -0.00428150368246343,
    -0.0018476468830562265,
    0.00023038576352319597,
    0.0002519631889427101,
    3.93473203162716e-05,
];

const DB9_REC_LO: [f64; 18] = [
    0.038077947363878345,
    0.24383467461259034,
    0.6048231236901112,
    0.6572880780513005,
    0.13319738582500756,
    -0.2932737832791749,
    -0.09684078322297646,
    0.14854074933810638,
    0.03072568147933338,
    -0.06763282906132997,
    0.00025094711483145197,
    0.022361662123679096,
    -0.004723204757751397,
    -0.00428150368246343,
    0.0018476468830562265,
    0.00023038576352319597,
    -0.0002519631889427101,
    3.93473203162716e-05,
];

const DB9_REC_HI: [f64; 18] = [
    3.93473203162716e-05,
    0.0002519631889427101,
    0.00023038576352319597,
    -0.0018476468830562265,
    -0.00428150368246343,
    0.004723204757751397,
    0.022361662123679096,
    -0.00025094711483145197,
    -0.06763282906132997,
    -0.03072568147933338,
    0.14854074933810638,
    0.09684078322297646,
    -0.2932737832791749,
    -0.13319738582500756,
    0.6572880780513005,
    -0.6048231236901112,
    0.24383467461259034,
    -0.038077947363878345,
];

const SYM9_DEC_LO: [f64; 18] = [
    0.0014009155259146807,
    0.0006197808889855868,
    -0.013271967781817119,
    -0.01152821020767923,
    0.03022487885827568,
    0.0005834627461258068,
    -0.05456895843083407,
    0.238760914607303,
    0.717897082764412,
    0.6173384491409358,
    0.035272488035271894,
    -0.19155083129728512,
    -0.018233770779395985,
    0.06207778930288603,
    0.008859267493400484,
    -0.010264064027633142,
    -0.0004731544986800831,
    0.0010694900329086053,
];

const SYM9_DEC_HI: [f64; 18] = [
    -0.0010694900329086053,
    -0.0004731544986800831,
    0.010264064027633142,
    0.008859267493400484,
    -0.06207778930288603,
    -0.018233770779395985,
    0.19155083129728512,
    0.035272488035271894,
    -0.6173384491409358,
    0.717897082764412,
    -0.238760914607303,
    -0.05456895843083407,
    -0.0005834627461258068,
    0.03022487885827568,
    0.01152821020767923,
    -0.013271967781817119,
    -0.0006197808889855868,
    0.0014009155259146807,
];

const SYM9_REC_LO: [f64; 18] = [
    0.0010694900329086053,
    -0.0004731544986800831,
    -0.010264064027633142,
    0.008859267493400484,
    0.06207778930288603,
    -0.018233770779395985,
    -0.19155083129728512,
    0.035272488035271894,
    0.6173384491409358,
    0.717897082764412,
    0.238760914607303,
    -0.05456895843083407,
    0.0005834627461258068,
    0.03022487885827568,
    -0.01152821020767923,
    -0.013271967781817119,
    0.0006197808889855868,
    0.0014009155259146807,
];

const SYM9_REC_HI: [f64; 18] = [
    0.0014009155259146807,
    -0.0006197808889855868,
    -0.013271967781817119,
    0.01152821020767923,
    0.03022487885827568,
    -0.0005834627461258068,
    -0.05456895843083407,
    -0.238760914607303,
    0.717897082764412,
    -0.6173384491409358,
    0.035272488035271894,
    0.19155083129728512,
    -0.018233770779395985,
    -0.06207778930288603,
    0.008859267493400484,
    0.010264064027633142,
    -0.0004731544986800831,
    -0.0010694900329086053,
];

const SYM10_DEC_LO: [f64; 20] = [
    0.0007701598091144901,
    9.563267072289475e-05,
    -0.008641299277022422,
    -0.0014653825813050513,
    0.0459272392310922,
    0.011609893903711381,
    -0.15949427888491757,
    -0.07088053578324385,
    0.47169066693843925,
    0.7695100370211071,
    0.38382676106708546,
    -0.03553674047381755,
    -0.0319900568824278,
    0.04999497207737669,
    0.005764912033581909,
    -0.02035493981231129,
    -0.0008043589320165449,
    0.004593173585311828,
    5.7036083618494284e-05,
    -0.0004593294210046588,
];

const SYM10_DEC_HI: [f64; 20] = [
    0.0004593294210046588,
    5.7036083618494284e-05,
    -0.004593173585311828,
    -0.0008043589320165449,
    0.02035493981231129,
    0.005764912033581909,
    -0.04999497207737669,
    -0.0319900568824278,
    0.03553674047381755,
    0.38382676106708546,
    -0.7695100370211071,
    0.47169066693843925,
    0.07088053578324385,
    -0.15949427888491757,
    -0.011609893903711381,
    0.0459272392310922,
    0.0014653825813050513,
    -0.008641299277022422,
    -9.563267072289475e-05,
    0.0007701598091144901,
];

const SYM10_REC_LO: [f64; 20] = [
    -0.0004593294210046588,
    5.7036083618494284e-05,
    0.004593173585311828,
    -0.0008043589320165449,
    -0.02035493981231129,
    0.005764912033581909,
    0.04999497207737669,
    -0.0319900568824278,
    -0.03553674047381755,
    0.38382676106708546,
    0.7695100370211071,
    0.47169066693843925,
    -0.07088053578324385,
    -0.15949427888491757,
    0.011609893903711381,
    0.0459272392310922,
    -0.0014653825813050513,
    -0.008641299277022422,
    9.563267072289475e-05,
    0.0007701598091144901,
];

const SYM10_REC_HI: [f64; 20] = [
    0.0007701598091144901,
    -9.563267072289475e-05,
    -0.008641299277022422,
    0.0014653825813050513,
    0.0459272392310922,
    -0.011609893903711381,
    -0.15949427888491757,
    0.07088053578324385,
    0.47169066693843925,
    -0.7695100370211071,
    0.38382676106708546,
    0.03553674047381755,
    -0.0319900568824278,
    -0.04999497207737669,
    0.005764912033581909,
    0.02035493981231129,
    -0.0008043589320165449,
    -0.004593173585311828,
    5.7036083618494284e-05,
    0.0004593294210046588,
];

const COIF3_DEC_LO: [f64; 18] = [
    -3.459977319727278e-05,
    -7.0983302506379e-05,
    0.0004662169598204029,
    0.0011175187708306303,
    -0.0025745176881367972,
    -0.009007976136730624,
    0.015880544863669452,
    0.03455502757329774,
    -0.08230192710629983,
    -0.07179982161915484,
    0.42848347637737,
    0.7937772226260872,
    0.40517690240911824,
    -0.06112339000297255,
    -0.06577191128146936,
    0.023452696142077168,
    0.007782596425672746,
    -0.003793512864380802,
];

const COIF3_DEC_HI: [f64; 18] = [
    0.003793512864380802,
    0.007782596425672746,
    -0.023452696142077168,
    -0.06577191128146936,
    0.06112339000297255,
    0.40517690240911824,
    -0.7937772226260872,
    0.42848347637737,
    0.07179982161915484,
    -0.08230192710629983,
    -0.03455502757329774,
    0.015880544863669452,
    0.009007976136730624,
    -0.0025745176881367972,
    -0.0011175187708306303,
    0.0004662169598204029,
    7.0983302506379e-05,
    -3.459977319727278e-05,
];

const COIF3_REC_LO: [f64; 18] = [
    -0.003793512864380802,
    0.007782596425672746,
    0.023452696142077168,
    -0.06577191128146936,
    -0.06112339000297255,
    0.40517690240911824,
    0.7937772226260872,
    0.42848347637737,
    -0.07179982161915484,
    -0.08230192710629983,
    0.03455502757329774,
    0.015880544863669452,
    -0.009007976136730624,
    -0.0025745176881367972,
    0.0011175187708306303,
    0.0004662169598204029,
    -7.0983302506379e-05,
    -3.459977319727278e-05,
];

const COIF3_REC_HI: [f64; 18] = [
    -3.459977319727278e-05,
    7.0983302506379e-05,
    0.0004662169598204029,
    -0.0011175187708306303,
    -0.0025745176881367972,
    0.009007976136730624,
    0.015880544863669452,
    -0.03455502757329774,
    -0.08230192710629983,
    0.07179982161915484,
    0.42848347637737,
    -0.7937772226260872,
    0.40517690240911824,
    0.06112339000297255,
    -0.06577191128146936,
    -0.023452696142077168,
    0.007782596425672746,
    0.003793512864380802,
];

const COIF5_DEC_LO: [f64; 30] = [
    -9.604010112767894e-08,
    -1.6237995172048338e-07,
    2.0612203985788783e-06,
    3.7007277113394796e-06,
    -2.1270221672515614e-05,
    -4.12198619242655e-05,
    0.00014035632812373243,
    0.0003018579416682448,
    -0.0006375589261258812,
    -0.0016616273039298788,
    0.0024315754425382886,
    0.006761520220620417,
    -0.009159507338676163,
    -0.019758391600965465,
    0.032674799467057355,
    0.041287530472117834,
    -0.10556315130733723,
    -0.06203775157498196,
    0.4379823066591634,
    0.7742936228603274,
    0.42157126673075435,
    -0.052046670253554764,
    -0.09192158806008609,
    0.028169744270532353,
    0.023408322118927783,
    -0.010131584846900276,
    -0.00415931262757864,
    0.0021782943778456947,
    0.0003585777411617577,
    -0.000212081862067494,
];

const COIF5_DEC_HI: [f64; 30] = [
    0.000212081862067494,
    0.0003585777411617577,
    -0.0021782943778456947,
    -0.00415931262757864,
    0.010131584846900276,
    0.023408322118927783,
    -0.028169744270532353,
    -0.09192158806008609,
    0.052046670253554764,
    0.42157126673075435,
    -0.7742936228603274,
    0.4379823066591634,
    0.06203775157498196,
    -0.10556315130733723,
    -0.041287530472117834,
    0.032674799467057355,
    0.019758391600965465,
    -0.009159507338676163,
    -0.006761520220620417,
    0.0024315754425382886,
    0.0016616273039298788,
    -0.0006375589261258812,
    -0.0003018579416682448,
    0.00014035632812373243,
    4.12198619242655e-05,
    -2.1270221672515614e-05,
    -3.7007277113394796e-06,
    2.0612203985788783e-06,
    1.6237995172048338e-07,
    -9.604010112767894e-08,
];

const COIF5_REC_LO: [f64; 30] = [
    -0.000212081862067494,
    0.0003585777411617577,
    0.0021782943778456947,
    -0.00415931262757864,
    -0.010131584846900276,
    0.023408322118927783,
    0.028169744270532353,
    -0.09192158806008609,
    -0.052046670253554764,
    0.42157126673075435,
    0.7742936228603274,
    0.4379823066591634,
    -0.06203775157498196,
    -0.10556315130733723,
    0.041287530472117834,
    0.032674799467057355,
    -0.019758391600965465,
    -0.009159507338676163,
    0.006761520220620417,
    0.0024315754425382886,
    -0.0016616273039298788,
    -0.0006375589261258812,
    0.0003018579416682448,
    0.00014035632812373243,
    -4.12198619242655e-05,
    -2.1270221672515614e-05,
    3.7007277113394796e-06,
    2.0612203985788783e-06,
    -1.6237995172048338e-07,
    -9.604010112767894e-08,
];

const COIF5_REC_HI: [f64; 30] = [
    -9.604010112767894e-08,
    1.6237995172048338e-07,
    2.0612203985788783e-06,
    -3.7007277113394796e-06,
    -2.1270221672515614e-05,
    4.12198619242655e-05,
    0.00014035632812373243,
    -0.0003018579416682448,
    -0.0006375589261258812,
    0.0016616273039298788,
    0.0024315754425382886,
    -0.006761520220620417,
    -0.009159507338676163,
    0.019758391600965465,
    0.032674799467057355,
    -0.041287530472117834,
    -0.10556315130733723,
    0.06203775157498196,
    0.4379823066591634,
    -0.7742936228603274,
    0.42157126673075435,
    0.052046670253554764,
    -0.09192158806008609,
    -0.028169744270532353,
    0.023408322118927783,
    0.010131584846900276,
    -0.00415931262757864,
    -0.0021782943778456947,
    0.0003585777411617577,
    0.000212081862067494,
];

const BIOR2_8_DEC_LO: [f64; 18] = [
    0.0,
    0.0015105430506304422,
    -0.0030210861012608843,
    -0.012947511862546647,
    0.02891610982635418,
    0.05299848189069094,
    -0.13491307360773605,
    -0.16382918343409023,
    0.46257144047591653,
    0.9516421218971786,
    0.46257144047591653,
    -0.16382918343409023,
    -0.13491307360773605,
    0.05299848189069094,
    0.02891610982635418,
    -0.012947511862546647,
    -0.0030210861012608843,
    0.0015105430506304422,
];

const BIOR2_8_DEC_HI: [f64; 18] = [
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.3535533905932738,
    -0.7071067811865476,
    0.3535533905932738,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.0,
];

const BIOR2_8_REC_LO: [f64; 18] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.3535533905932738,
    0.7071067811865476,
    0.3535533905932738,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR2_8_REC_HI: [f64; 18] = [
    0.0,
    -0.0015105430506304422,
    -0.0030210861012608843,
    0.012947511862546647,
    0.02891610982635418,
    -0.05299848189069094,
    -0.13491307360773605,
    0.16382918343409023,
    0.46257144047591653,
    -0.9516421218971786,
    0.46257144047591653,
    0.16382918343409023,
    -0.13491307360773605,
    -0.05299848189069094,
    0.02891610982635418,
    0.012947511862546647,
    -0.0030210861012608843,
    -0.0015105430506304422,
];

const RBIO2_8_DEC_LO: [f64; 18] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.3535533905932738,
    0.7071067811865476,
    0.3535533905932738,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

const RBIO2_8_DEC_HI: [f64; 18] = [
    -0.0015105430506304422,
    -0.0030210861012608843,
    0.012947511862546647,
    0.02891610982635418,
    -0.05299848189069094,
    -0.13491307360773605,
    0.16382918343409023,
    0.46257144047591653,
    -0.9516421218971786,
    0.46257144047591653,
    0.16382918343409023,
    -0.13491307360773605,
    -0.05299848189069094,
    0.02891610982635418,
    0.012947511862546647,
    -0.0030210861012608843,
    -0.0015105430506304422,
    0.0,
];

const RBIO2_8_REC_LO: [f64; 18] = [
    0.0015105430506304422,
    -0.0030210861012608843,
    -0.012947511862546647,
    0.02891610982635418,
    0.05299848189069094,
    -0.13491307360773605,
    -0.16382918343409023,
    0.46257144047591653,
    0.9516421218971786,
    0.46257144047591653,
    -0.16382918343409023,
    -0.13491307360773605,
    0.05299848189069094,
    0.02891610982635418,
    -0.012947511862546647,
    -0.0030210861012608843,
    0.0015105430506304422,
    0.0,
];

const RBIO2_8_REC_HI: [f64; 18] = [
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.3535533905932738,
    -0.7071067811865476,
    0.3535533905932738,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
];

const BIOR6_8_DEC_LO: [f64; 18] = [
    0.0,
    0.0019088317364812906,
    -0.0019142861290887667,
    -0.016990639867602342,
    0.01193456527972926,
    0.04973290349094079,
    -0.07726317316720414,
    -0.09405920349573646,
    0.4207962846098268,
    0.8259229974584023,
    0.4207962846098268,
    -0.09405920349573646,
    -0.07726317316720414,
    0.04973290349094079,
    0.01193456527972926,
    -0.016990639867602342,
    -0.0019142861290887667,
    0.0019088317364812906,
];

const BIOR6_8_DEC_HI: [f64; 18] = [
    -0.0,
    0.0,
    -0.0,
    0.014426282505624435,
    -0.014467504896790148,
    -0.07872200106262882,
    0.04036797903033992,
    0.41784910915027457,
    -0.7589077294536541,
    0.41784910915027457,
    0.04036797903033992,
    -0.07872200106262882,
    -0.014467504896790148,
    0.014426282505624435,
    -0.0,
    0.0,
    -0.0,
    0.0,
];

const BIOR6_8_REC_LO: [f64; 18] = [
    0.0,
    0.0,
    0.0,
    0.014426282505624435,
    0.014467504896790148,
    -0.07872200106262882,
    -0.04036797903033992,
    0.41784910915027457,
    0.7589077294536541,
    0.41784910915027457,
    -0.04036797903033992,
    -0.07872200106262882,
    0.014467504896790148,
    0.014426282505624435,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR6_8_REC_HI: [f64; 18] = [
    0.0,
    -0.0019088317364812906,
    -0.0019142861290887667,
    0.016990639867602342,
    0.01193456527972926,
    -0.04973290349094079,
    -0.07726317316720414,
    0.09405920349573646,
    0.4207962846098268,
    -0.8259229974584023,
    0.4207962846098268,
    0.09405920349573646,
    -0.07726317316720414,
    -0.04973290349094079,
    0.01193456527972926,
    0.016990639867602342,
    -0.0019142861290887667,
    -0.0019088317364812906,
];

const DMEY_DEC_LO: [f64; 62] = [
    8.18471119884962e-07,
    3.840819780846082e-07,
    -7.391986548920985e-06,
    -1.7255419875717042e-06,
    9.085087779901588e-06,
    -1.1912357641158507e-05,
    1.1719653407171698e-05,
    3.166741969260631e-05,
    -1.1114637453075369e-05,
    -1.1602191923841272e-05,
    5.780159002200112e-05,
    3.59089969282329e-05,
    -0.00022440469700706474,
    -6.506424466348336e-05,
    0.00024211575077504532,
    0.0006247224971581882,
    -0.0003382200957954655,
    -0.0027502440852860254,
    0.0020710000213947513,
    0.006120078274002801,
    -0.006345843682420071,
    -0.011068458221632965,
    0.015194712290201164,
    0.01745705330676341,
    -0.032094949939069556,
    -0.024319609514170372,
    0.0636331468464515,
    0.030654937410771278,
    -0.1327120599644553,
    -0.035033354131214556,
    0.44407075448164096,
    0.7437776044065529,
    0.44407075208327385,
    -0.03503336234806854,
    -0.13271204272468554,
    0.030654932501051044,
    0.06363316931889476,
    -0.024319553365959826,
    -0.032095219632814774,
    0.01745649273273855,
    0.01519455316582848,
    -0.01107103082504477,
    -0.006343618436517345,
    0.006117505416867046,
    0.0020778596417975,
    -0.002750652843871575,
    -0.0003287976284994965,
    0.0006231148060913778,
    0.0002500566907037141,
    -7.318453308656106e-05,
    -0.00020380877888322206,
    3.6129972576742496e-05,
    6.298151863617648e-05,
    3.736229574141618e-05,
    -3.180353507728738e-05,
    -3.928841688287822e-05,
    -1.8748151711319347e-05,
    2.2240141476300256e-05,
    -5.049197548519349e-06,
    4.256810933660589e-06,
    -6.723368929388923e-07,
    1.4327366580643096e-06,
];

const DMEY_DEC_HI: [f64; 62] = [
    -1.4327366580643096e-06,
    -6.723368929388923e-07,
    -4.256810933660589e-06,
    -5.049197548519349e-06,
    -2.2240141476300256e-05,
    -1.8748151711319347e-05,
    3.928841688287822e-05,
    -3.180353507728738e-05,
    -3.736229574141618e-05,
    6.298151863617648e-05,
    -3.6129972576742496e-05,
    -0.00020380877888322206,
    7.318453308656106e-05,
    0.0002500566907037141,
    -0.0006231148060913778,
    -0.0003287976284994965,
    0.002750652843871575,
    0.0020778596417975,
    -0.006117505416867046,
    -0.006343618436517345,
    0.01107103082504477,
    0.01519455316582848,
    -0.01745649273273855,
    -0.032095219632814774,
    0.024319553365959826,
    0.06363316931889476,
    -0.030654932501051044,
    -0.13271204272468554,
    0.03503336234806854,
    0.44407075208327385,
    -0.7437776044065529,
    0.44407075448164096,
    0.035033354131214556,
    -0.1327120599644553,
    -0.030654937410771278,
    0.0636331468464515,
    0.024319609514170372,
    -0.032094949939069556,
    -0.01745705330676341,
    0.015194712290201164,
    0.011068458221632965,
    -0.006345843682420071,
    -0.006120078274002801,
    0.0020710000213947513,
    0.0027502440852860254,
    -0.0003382200957954655,
    -0.0006247224971581882,
    0.00024211575077504532,
    6.506424466348336e-05,
    -0.00022440469700706474,
    -3.59089969282329e-05,
    5.780159002200112e-05,
    1.1602191923841272e-05,
    -1.1114637453075369e-05,
    -3.166741969260631e-05,
    1.1719653407171698e-05,
    1.1912357641158507e-05,
    9.085087779901588e-06,
    1.7255419875717042e-06,
    -7.391986548920985e-06,
    -3.840819780846082e-07,
    8.18471119884962e-07,
];

const DMEY_REC_LO: [f64; 62] = [
    1.4327366580643096e-06,
    -6.723368929388923e-07,
    4.256810933660589e-06,
    -5.049197548519349e-06,
    2.2240141476300256e-05,
    -1.8748151711319347e-05,
    -3.928841688287822e-05,
    -3.180353507728738e-05,
    3.736229574141618e-05,
    6.298151863617648e-05,
    3.6129972576742496e-05,
    -0.00020380877888322206,
    -7.318453308656106e-05,
    0.0002500566907037141,
    0.0006231148060913778,
    -0.0003287976284994965,
    -0.002750652843871575,
    0.0020778596417975,
    0.006117505416867046,
    -0.006343618436517345,
    -0.01107103082504477,
    0.01519455316582848,
    0.01745649273273855,
    -0.032095219632814774,
    -0.024319553365959826,
    0.06363316931889476,
    0.030654932501051044,
    -0.13271204272468554,
    -0.03503336234806854,
    0.44407075208327385,
    0.7437776044065529,
    0.44407075448164096,
    -0.035033354131214556,
    -0.1327120599644553,
    0.030654937410771278,
    0.0636331468464515,
    -0.024319609514170372,
    -0.032094949939069556,
    0.01745705330676341,
    0.015194712290201164,
    -0.011068458221632965,
    -0.006345843682420071,
    0.006120078274002801,
    0.0020710000213947513,
    -0.0027502440852860254,
    -0.0003382200957954655,
    0.0006247224971581882,
    0.00024211575077504532,
    -6.506424466348336e-05,
    -0.00022440469700706474,
    3.59089969282329e-05,
    5.780159002200112e-05,
    -1.1602191923841272e-05,
    -1.1114637453075369e-05,
    3.166741969260631e-05,
    1.1719653407171698e-05,
    -1.1912357641158507e-05,
    9.085087779901588e-06,
    -1.7255419875717042e-06,
    -7.391986548920985e-06,
    3.840819780846082e-07,
    8.18471119884962e-07,
];

const DMEY_REC_HI: [f64; 62] = [
    8.18471119884962e-07,
    -3.840819780846082e-07,
    -7.391986548920985e-06,
    1.7255419875717042e-06,
    9.085087779901588e-06,
    1.1912357641158507e-05,
    1.1719653407171698e-05,
    -3.166741969260631e-05,
    -1.1114637453075369e-05,
    1.1602191923841272e-05,
    5.780159002200112e-05,
    -3.59089969282329e-05,
    -0.00022440469700706474,
    6.506424466348336e-05,
    0.00024211575077504532,
    -0.0006247224971581882,
    -0.0003382200957954655,
    0.0027502440852860254,
    0.0020710000213947513,
    -0.006120078274002801,
    -0.006345843682420071,
    0.011068458221632965,
    0.015194712290201164,
    -0.01745705330676341,
    -0.032094949939069556,
    0.024319609514170372,
    0.0636331468464515,
    -0.030654937410771278,
    -0.1327120599644553,
    0.035033354131214556,
    0.44407075448164096,
    -0.7437776044065529,
    0.44407075208327385,
    0.03503336234806854,
    -0.13271204272468554,
    -0.030654932501051044,
    0.06363316931889476,
    0.024319553365959826,
    -0.032095219632814774,
    -0.01745649273273855,
    0.01519455316582848,
    0.01107103082504477,
    -0.006343618436517345,
    -0.006117505416867046,
    0.0020778596417975,
    0.002750652843871575,
    -0.0003287976284994965,
    -0.0006231148060913778,
    0.0002500566907037141,
    7.318453308656106e-05,
    -0.00020380877888322206,
    -3.6129972576742496e-05,
    6.298151863617648e-05,
    -3.736229574141618e-05,
    -3.180353507728738e-05,
    3.928841688287822e-05,
    -1.8748151711319347e-05,
    -2.2240141476300256e-05,
    -5.049197548519349e-06,
    -4.256810933660589e-06,
    -6.723368929388923e-07,
    -1.4327366580643096e-06,
];

pub(crate) struct FilterTable {
    pub name: &'static str,
    pub dec_lo: &'static [f64],
    pub dec_hi: &'static [f64],
    pub rec_lo: &'static [f64],
    pub rec_hi: &'static [f64],
    pub orthogonal: bool,
}

pub(crate) static TABLES: &[FilterTable] = &[
    FilterTable {
        name: "haar",
        dec_lo: &HAAR_DEC_LO,
        dec_hi: &HAAR_DEC_HI,
        rec_lo: &HAAR_REC_LO,
        rec_hi: &HAAR_REC_HI,
        orthogonal: true,
    },
    FilterTable {
        name: "db9",
        dec_lo: &DB9_DEC_LO,
        dec_hi: &DB9_DEC_HI,
        rec_lo: &DB9_REC_LO,
        rec_hi: &DB9_REC_HI,
        orthogonal: true,
    },
    FilterTable {
        name: "sym9",
        dec_lo: &SYM9_DEC_LO,
        dec_hi: &SYM9_DEC_HI,
        rec_lo: &SYM9_REC_LO,
        rec_hi: &SYM9_REC_HI,
        orthogonal: true,
    },
    FilterTable {
        name: "sym10",
        dec_lo: &SYM10_DEC_LO,
        dec_hi: &SYM10_DEC_HI,
        rec_lo: &SYM10_REC_LO,
        rec_hi: &SYM10_REC_HI,
        orthogonal: true,
    },
    FilterTable {
        name: "coif3",
        dec_lo: &COIF3_DEC_LO,
        dec_hi: &COIF3_DEC_HI,
        rec_lo: &COIF3_REC_LO,
        rec_hi: &COIF3_REC_HI,
        orthogonal: true,
    },
    FilterTable {
        name: "coif5",
        dec_lo: &COIF5_DEC_LO,
        dec_hi: &COIF5_DEC_HI,
        rec_lo: &COIF5_REC_LO,
        rec_hi: &COIF5_REC_HI,
        orthogonal: true,
    },
    FilterTable {
        name: "bior2.8",
        dec_lo: &BIOR2_8_DEC_LO,
        dec_hi: &BIOR2_8_DEC_HI,
        rec_lo: &BIOR2_8_REC_LO,
        rec_hi: &BIOR2_8_REC_HI,
        orthogonal: false,
    },
    FilterTable {
        name: "rbio2.8",
        dec_lo: &RBIO2_8_DEC_LO,
        dec_hi: &RBIO2_8_DEC_HI,
        rec_lo: &RBIO2_8_REC_LO,
        rec_hi: &RBIO2_8_REC_HI,
        orthogonal: false,
    },
    FilterTable {
        name: "bior6.8",
        dec_lo: &BIOR6_8_DEC_LO,
        dec_hi: &BIOR6_8_DEC_HI,
        rec_lo: &BIOR6_8_REC_LO,
        rec_hi: &BIOR6_8_REC_HI,
        orthogonal: false,
    },
    FilterTable {
        name: "dmey",
        dec_lo: &DMEY_DEC_LO,
        dec_hi: &DMEY_DEC_HI,
        rec_lo: &DMEY_REC_LO,
        rec_hi: &DMEY_REC_HI,
        orthogonal: true,
    },
];
